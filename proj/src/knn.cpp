#include "lmk/knn.hpp"

#include <algorithm>
#include <cstdint>
#include <exception>
#include <thread>
#include <vector>

#include "lmk/errors.hpp"

#if defined(__AVX2__) && defined(__FMA__)
#include <immintrin.h>
#define LMK_USE_AVX2 1
#endif

namespace lmk {

namespace {

// Every (query, gallery) pair must be accumulated with the exact same
// instruction pattern no matter which micro-kernel or thread handles it:
// 8-lane FMA over full chunks, horizontal sum, then a scalar tail. That is
// what makes results byte-identical across thread counts and block sizes.

#ifdef LMK_USE_AVX2

inline float hsum8(__m256 v) {
  __m128 lo = _mm256_castps256_ps128(v);
  __m128 hi = _mm256_extractf128_ps(v, 1);
  lo = _mm_add_ps(lo, hi);
  __m128 shuf = _mm_movehdup_ps(lo);
  __m128 sums = _mm_add_ps(lo, shuf);
  shuf = _mm_movehl_ps(shuf, sums);
  sums = _mm_add_ss(sums, shuf);
  return _mm_cvtss_f32(sums);
}

inline float dot_one(const float* a, const float* b, std::size_t d) {
  __m256 acc = _mm256_setzero_ps();
  std::size_t j = 0;
  for (; j + 8 <= d; j += 8) {
    acc = _mm256_fmadd_ps(_mm256_loadu_ps(a + j), _mm256_loadu_ps(b + j), acc);
  }
  float s = hsum8(acc);
  for (; j < d; ++j) {
    s += a[j] * b[j];
  }
  return s;
}

// 1 query row against 4 gallery rows.
inline void kernel_1x4(const float* q, const float* g0, const float* g1,
                       const float* g2, const float* g3, std::size_t d,
                       float* out) {
  __m256 a0 = _mm256_setzero_ps();
  __m256 a1 = _mm256_setzero_ps();
  __m256 a2 = _mm256_setzero_ps();
  __m256 a3 = _mm256_setzero_ps();
  std::size_t j = 0;
  for (; j + 8 <= d; j += 8) {
    const __m256 qv = _mm256_loadu_ps(q + j);
    a0 = _mm256_fmadd_ps(qv, _mm256_loadu_ps(g0 + j), a0);
    a1 = _mm256_fmadd_ps(qv, _mm256_loadu_ps(g1 + j), a1);
    a2 = _mm256_fmadd_ps(qv, _mm256_loadu_ps(g2 + j), a2);
    a3 = _mm256_fmadd_ps(qv, _mm256_loadu_ps(g3 + j), a3);
  }
  float s0 = hsum8(a0), s1 = hsum8(a1), s2 = hsum8(a2), s3 = hsum8(a3);
  for (; j < d; ++j) {
    s0 += q[j] * g0[j];
    s1 += q[j] * g1[j];
    s2 += q[j] * g2[j];
    s3 += q[j] * g3[j];
  }
  out[0] = s0;
  out[1] = s1;
  out[2] = s2;
  out[3] = s3;
}

// 2 query rows against 4 gallery rows; 8 independent accumulators.
inline void kernel_2x4(const float* q0, const float* q1, const float* g0,
                       const float* g1, const float* g2, const float* g3,
                       std::size_t d, float* out0, float* out1) {
  __m256 a00 = _mm256_setzero_ps(), a01 = _mm256_setzero_ps();
  __m256 a02 = _mm256_setzero_ps(), a03 = _mm256_setzero_ps();
  __m256 a10 = _mm256_setzero_ps(), a11 = _mm256_setzero_ps();
  __m256 a12 = _mm256_setzero_ps(), a13 = _mm256_setzero_ps();
  std::size_t j = 0;
  for (; j + 8 <= d; j += 8) {
    const __m256 q0v = _mm256_loadu_ps(q0 + j);
    const __m256 q1v = _mm256_loadu_ps(q1 + j);
    const __m256 g0v = _mm256_loadu_ps(g0 + j);
    const __m256 g1v = _mm256_loadu_ps(g1 + j);
    const __m256 g2v = _mm256_loadu_ps(g2 + j);
    const __m256 g3v = _mm256_loadu_ps(g3 + j);
    a00 = _mm256_fmadd_ps(q0v, g0v, a00);
    a01 = _mm256_fmadd_ps(q0v, g1v, a01);
    a02 = _mm256_fmadd_ps(q0v, g2v, a02);
    a03 = _mm256_fmadd_ps(q0v, g3v, a03);
    a10 = _mm256_fmadd_ps(q1v, g0v, a10);
    a11 = _mm256_fmadd_ps(q1v, g1v, a11);
    a12 = _mm256_fmadd_ps(q1v, g2v, a12);
    a13 = _mm256_fmadd_ps(q1v, g3v, a13);
  }
  float s00 = hsum8(a00), s01 = hsum8(a01), s02 = hsum8(a02), s03 = hsum8(a03);
  float s10 = hsum8(a10), s11 = hsum8(a11), s12 = hsum8(a12), s13 = hsum8(a13);
  for (; j < d; ++j) {
    s00 += q0[j] * g0[j];
    s01 += q0[j] * g1[j];
    s02 += q0[j] * g2[j];
    s03 += q0[j] * g3[j];
    s10 += q1[j] * g0[j];
    s11 += q1[j] * g1[j];
    s12 += q1[j] * g2[j];
    s13 += q1[j] * g3[j];
  }
  out0[0] = s00;
  out0[1] = s01;
  out0[2] = s02;
  out0[3] = s03;
  out1[0] = s10;
  out1[1] = s11;
  out1[2] = s12;
  out1[3] = s13;
}

#else  // scalar fallback

inline float dot_one(const float* a, const float* b, std::size_t d) {
  float s0 = 0.0f, s1 = 0.0f, s2 = 0.0f, s3 = 0.0f;
  std::size_t j = 0;
  for (; j + 4 <= d; j += 4) {
    s0 += a[j] * b[j];
    s1 += a[j + 1] * b[j + 1];
    s2 += a[j + 2] * b[j + 2];
    s3 += a[j + 3] * b[j + 3];
  }
  float s = ((s0 + s1) + (s2 + s3));
  for (; j < d; ++j) {
    s += a[j] * b[j];
  }
  return s;
}

inline void kernel_1x4(const float* q, const float* g0, const float* g1,
                       const float* g2, const float* g3, std::size_t d,
                       float* out) {
  out[0] = dot_one(q, g0, d);
  out[1] = dot_one(q, g1, d);
  out[2] = dot_one(q, g2, d);
  out[3] = dot_one(q, g3, d);
}

inline void kernel_2x4(const float* q0, const float* q1, const float* g0,
                       const float* g1, const float* g2, const float* g3,
                       std::size_t d, float* out0, float* out1) {
  kernel_1x4(q0, g0, g1, g2, g3, d, out0);
  kernel_1x4(q1, g0, g1, g2, g3, d, out1);
}

#endif

// Fills out[qi * ng + gi] with dot(Q row qi, G row gi) for a tile.
void dot_tile(const float* Q, std::size_t nq, const float* G, std::size_t ng,
              std::size_t d, float* out) {
  std::size_t qi = 0;
  for (; qi + 2 <= nq; qi += 2) {
    const float* q0 = Q + qi * d;
    const float* q1 = q0 + d;
    float* out0 = out + qi * ng;
    float* out1 = out0 + ng;
    std::size_t gi = 0;
    for (; gi + 4 <= ng; gi += 4) {
      const float* g = G + gi * d;
      kernel_2x4(q0, q1, g, g + d, g + 2 * d, g + 3 * d, d, out0 + gi,
                 out1 + gi);
    }
    for (; gi < ng; ++gi) {
      const float* g = G + gi * d;
      out0[gi] = dot_one(q0, g, d);
      out1[gi] = dot_one(q1, g, d);
    }
  }
  if (qi < nq) {
    const float* q0 = Q + qi * d;
    float* out0 = out + qi * ng;
    std::size_t gi = 0;
    for (; gi + 4 <= ng; gi += 4) {
      const float* g = G + gi * d;
      kernel_1x4(q0, g, g + d, g + 2 * d, g + 3 * d, d, out0 + gi);
    }
    for (; gi < ng; ++gi) {
      out0[gi] = dot_one(q0, G + gi * d, d);
    }
  }
}

struct Candidate {
  float score;
  std::uint32_t index;
};

// Scans the gallery for queries [q_begin, q_end), calling
// consume(query_index, tile_scores, tile_gallery_start, tile_rows) after
// each (query, gallery-tile) score computation.
template <class Consume>
void scan_range(const EmbeddingMatrix& queries, const EmbeddingMatrix& gallery,
                const SearchOptions& opts, std::size_t q_begin,
                std::size_t q_end, Consume&& consume) {
  const std::size_t d = queries.dim;
  const std::size_t qb = std::max<std::size_t>(1, opts.query_block);
  const std::size_t gb = std::max<std::size_t>(1, opts.gallery_block);
  const std::size_t ng = gallery.rows();

  std::vector<float> scores(qb * gb);
  for (std::size_t qt = q_begin; qt < q_end; qt += qb) {
    const std::size_t qn = std::min(qb, q_end - qt);
    for (std::size_t gt = 0; gt < ng; gt += gb) {
      const std::size_t gn = std::min(gb, ng - gt);
      dot_tile(queries.data.data() + qt * d, qn, gallery.data.data() + gt * d,
               gn, d, scores.data());
      for (std::size_t qi = 0; qi < qn; ++qi) {
        consume(qt + qi, scores.data() + qi * gn, gt, gn);
      }
    }
  }
}

template <class Work>
void parallel_over_queries(std::size_t n, int threads, Work&& work) {
  const std::size_t t =
      std::min<std::size_t>(std::max(threads, 1), std::max<std::size_t>(n, 1));
  if (t <= 1) {
    work(0, n);
    return;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(t);
  pool.reserve(t);
  for (std::size_t i = 0; i < t; ++i) {
    const std::size_t begin = n * i / t;
    const std::size_t end = n * (i + 1) / t;
    pool.emplace_back([&, i, begin, end] {
      try {
        work(begin, end);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) {
    th.join();
  }
  for (const auto& err : errors) {
    if (err) {
      std::rethrow_exception(err);
    }
  }
}

void validate_pair(const EmbeddingMatrix& queries,
                   const EmbeddingMatrix& gallery) {
  if (queries.dim != gallery.dim) {
    throw DimError("query dim " + std::to_string(queries.dim) +
                   " != gallery dim " + std::to_string(gallery.dim));
  }
  if (gallery.rows() == 0) {
    throw EmptyGalleryError("gallery is empty");
  }
}

}  // namespace

std::vector<RankedList> cosine_topk(const EmbeddingMatrix& queries,
                                    const EmbeddingMatrix& gallery,
                                    std::size_t k, const SearchOptions& opts) {
  validate_pair(queries, gallery);
  if (k == 0) {
    throw Error("k must be positive");
  }

  const auto& gallery_ids = gallery.ids;
  // Heap order: worst kept candidate on top. better(a, b) follows the
  // RankedList contract, score descending then index_id ascending.
  const auto better = [&gallery_ids](const Candidate& a, const Candidate& b) {
    if (a.score != b.score) {
      return a.score > b.score;
    }
    return gallery_ids[a.index] < gallery_ids[b.index];
  };

  std::vector<RankedList> results(queries.rows());
  parallel_over_queries(
      queries.rows(), opts.threads, [&](std::size_t begin, std::size_t end) {
        std::vector<std::vector<Candidate>> heaps(end - begin);
        scan_range(queries, gallery, opts, begin, end,
                   [&](std::size_t q, const float* tile, std::size_t g_start,
                       std::size_t g_rows) {
                     auto& heap = heaps[q - begin];
                     for (std::size_t gi = 0; gi < g_rows; ++gi) {
                       const Candidate cand{
                           tile[gi], static_cast<std::uint32_t>(g_start + gi)};
                       if (heap.size() < k) {
                         heap.push_back(cand);
                         std::push_heap(heap.begin(), heap.end(), better);
                       } else if (better(cand, heap.front())) {
                         std::pop_heap(heap.begin(), heap.end(), better);
                         heap.back() = cand;
                         std::push_heap(heap.begin(), heap.end(), better);
                       }
                     }
                   });
        for (std::size_t q = begin; q < end; ++q) {
          auto& heap = heaps[q - begin];
          std::sort(heap.begin(), heap.end(), better);
          auto& out = results[q];
          out.query_id = queries.ids[q];
          out.neighbors.reserve(heap.size());
          for (const auto& cand : heap) {
            out.neighbors.push_back(
                Neighbor{gallery_ids[cand.index], double(cand.score)});
          }
        }
      });
  return results;
}

std::vector<std::vector<double>> cross_max_topt(
    const EmbeddingMatrix& queries, const EmbeddingMatrix& reference,
    std::size_t t, const SearchOptions& opts) {
  validate_pair(queries, reference);
  if (t == 0) {
    throw Error("t must be positive");
  }

  std::vector<std::vector<double>> results(queries.rows());
  parallel_over_queries(
      queries.rows(), opts.threads, [&](std::size_t begin, std::size_t end) {
        std::vector<std::vector<float>> heaps(end - begin);
        scan_range(queries, reference, opts, begin, end,
                   [&](std::size_t q, const float* tile, std::size_t,
                       std::size_t g_rows) {
                     auto& heap = heaps[q - begin];
                     for (std::size_t gi = 0; gi < g_rows; ++gi) {
                       const float s = tile[gi];
                       if (heap.size() < t) {
                         heap.push_back(s);
                         std::push_heap(heap.begin(), heap.end(),
                                        std::greater<float>());
                       } else if (s > heap.front()) {
                         std::pop_heap(heap.begin(), heap.end(),
                                       std::greater<float>());
                         heap.back() = s;
                         std::push_heap(heap.begin(), heap.end(),
                                        std::greater<float>());
                       }
                     }
                   });
        for (std::size_t q = begin; q < end; ++q) {
          auto& heap = heaps[q - begin];
          std::sort(heap.begin(), heap.end(), std::greater<float>());
          results[q].assign(heap.begin(), heap.end());
        }
      });
  return results;
}

}  // namespace lmk
