#include "fermisea/fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <tuple>

namespace fermisea {

namespace {
using PlanKey = std::tuple<std::vector<std::int64_t>, std::vector<std::int64_t>, int>;

std::vector<std::int64_t> flatten(const std::vector<FftDim>& dims) {
  std::vector<std::int64_t> v;
  v.reserve(dims.size() * 2);
  for (const auto& d : dims) {
    v.push_back(d.n);
    v.push_back(d.is);
  }
  return v;
}

fftw_plan get_plan(const std::vector<FftDim>& transform, const std::vector<FftDim>& loop, int sign, cplx* data) {
  static std::map<PlanKey, fftw_plan> cache;
  static std::mutex mu;
  PlanKey key{flatten(transform), flatten(loop), sign};
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;
  std::vector<fftw_iodim64> tdims, ldims;
  for (const auto& d : transform) tdims.push_back({d.n, d.is, d.is});
  for (const auto& d : loop) ldims.push_back({d.n, d.is, d.is});
  if (ldims.empty()) ldims.push_back({1, 1, 1});
  auto* buf = reinterpret_cast<fftw_complex*>(data);
  fftw_plan p = fftw_plan_guru64_dft(int(tdims.size()), tdims.data(), int(ldims.size()), ldims.data(), buf, buf,
                                     sign < 0 ? FFTW_FORWARD : FFTW_BACKWARD, FFTW_ESTIMATE | FFTW_UNALIGNED);
  if (!p) throw ParameterError("fft_exec: plan creation failed");
  cache.emplace(std::move(key), p);
  return p;
}
}  // namespace

void fft_exec(const std::vector<FftDim>& transform, const std::vector<FftDim>& loop, int sign, cplx* data) {
  fftw_plan p = get_plan(transform, loop, sign, data);
  auto* buf = reinterpret_cast<fftw_complex*>(data);
  fftw_execute_dft(p, buf, buf);  // new-array execute: thread-safe
}

void fft_1d_batch(std::int64_t n, std::int64_t stride, std::int64_t howmany, std::int64_t dist, int sign, cplx* data) {
  fft_exec({{n, stride}}, {{howmany, dist}}, sign, data);
}

}  // namespace fermisea
