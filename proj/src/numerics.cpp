#include "dcopt/numerics.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <numbers>
#include <thread>
#include <vector>

namespace dcopt {

Mat to_dense(const LinearMap& a) {
  Mat m(a.out_dim(), a.in_dim());
  Vec e = Vec::Zero(a.in_dim());
  Vec col(a.out_dim());
  for (Index j = 0; j < a.in_dim(); ++j) {
    e[j] = 1.0;
    a.apply_into(e, col);
    m.col(j) = col;
    e[j] = 0.0;
  }
  return m;
}

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

}  // namespace

RandomSource::RandomSource(std::uint64_t seed) : seed_(seed), engine_(splitmix64(seed)) {}

std::uint64_t RandomSource::next_u64() { return engine_(); }

double RandomSource::uniform() {
  // 53 random bits, shifted off zero.
  return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

std::uint64_t RandomSource::uniform_index(std::uint64_t n) {
  if (n == 0) throw InvalidInput("uniform_index: empty range");
  // Rejection keeps the draw exactly uniform.
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % n;
  std::uint64_t v;
  do {
    v = next_u64();
  } while (v >= limit);
  return v % n;
}

double RandomSource::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  // Marsaglia polar method.
  double u, v, s;
  do {
    u = 2.0 * uniform() - 1.0;
    v = 2.0 * uniform() - 1.0;
    s = u * u + v * v;
  } while (s >= 1.0 || s == 0.0);
  const double f = std::sqrt(-2.0 * std::log(s) / s);
  spare_ = v * f;
  has_spare_ = true;
  return u * f;
}

Vec RandomSource::normal_vector(Index n) {
  Vec v(n);
  for (Index i = 0; i < n; ++i) v[i] = normal();
  return v;
}

Mat RandomSource::normal_matrix(Index rows, Index cols) {
  Mat m(rows, cols);
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i) m(i, j) = normal();
  return m;
}

RandomSource RandomSource::derive(std::uint64_t stream) const {
  return RandomSource(splitmix64(seed_ ^ splitmix64(stream + 0x632BE59BD9B4E019ULL)));
}

NoiseKind parse_noise_kind(const std::string& s) {
  if (s == "I" || s == "1") return NoiseKind::I;
  if (s == "II" || s == "2") return NoiseKind::II;
  if (s == "III" || s == "3") return NoiseKind::III;
  if (s == "IV" || s == "4") return NoiseKind::IV;
  if (s == "V" || s == "5") return NoiseKind::V;
  throw InvalidInput("unknown noise kind '" + s + "'");
}

std::string to_string(NoiseKind k) {
  switch (k) {
    case NoiseKind::I: return "I";
    case NoiseKind::II: return "II";
    case NoiseKind::III: return "III";
    case NoiseKind::IV: return "IV";
    case NoiseKind::V: return "V";
  }
  throw InvalidInput("unknown noise kind");
}

Vec sample_noise(NoiseKind kind, Index count, RandomSource& rng) {
  if (count < 0) throw InvalidInput("sample_noise: negative count");
  Vec out(count);
  for (Index i = 0; i < count; ++i) {
    switch (kind) {
      case NoiseKind::I:
        out[i] = 10.0 * rng.normal();
        break;
      case NoiseKind::II: {
        // t_4 = Z / sqrt(chi2_4 / 4).
        const double z = rng.normal();
        double chi2 = 0.0;
        for (int j = 0; j < 4; ++j) {
          const double g = rng.normal();
          chi2 += g * g;
        }
        out[i] = 2.0 * z / std::sqrt(chi2 / 4.0);
        break;
      }
      case NoiseKind::III:
        out[i] = std::tan(std::numbers::pi * (rng.uniform() - 0.5));
        break;
      case NoiseKind::IV: {
        const double sigma = rng.uniform(1.0, 5.0);
        out[i] = sigma * rng.normal();
        break;
      }
      case NoiseKind::V: {
        const double u = rng.uniform() - 0.5;
        out[i] = (u < 0 ? 1.0 : -1.0) * std::log(1.0 - 2.0 * std::abs(u));
        break;
      }
      default:
        throw InvalidInput("sample_noise: unknown noise kind");
    }
  }
  return out;
}

double estimate_op_norm(const LinearMap& a, int iters, RandomSource& rng) {
  if (iters < 1) throw InvalidInput("estimate_op_norm: iters must be positive");
  Vec v = rng.normal_vector(a.in_dim());
  double nv = v.norm();
  if (nv == 0.0) return 0.0;
  v /= nv;
  Vec av(a.out_dim());
  Vec atav(a.in_dim());
  double best = 0.0;
  for (int it = 0; it < iters; ++it) {
    a.apply_into(v, av);
    best = std::max(best, av.norm());
    a.apply_adjoint_into(av, atav);
    const double n = atav.norm();
    if (n == 0.0) break;
    v = atav / n;
  }
  return best;
}

void parallel_for(int count, int threads, const std::function<void(int)>& body) {
  if (count <= 0) return;
  const int workers = std::max(1, std::min(threads, count));
  if (workers == 1) {
    for (int i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr first;
  std::mutex mu;
  auto work = [&] {
    for (int i = next++; i < count; i = next++) {
      try {
        body(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(mu);
        if (!first) first = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w) pool.emplace_back(work);
  for (auto& t : pool) t.join();
  if (first) std::rethrow_exception(first);
}

}  // namespace dcopt
