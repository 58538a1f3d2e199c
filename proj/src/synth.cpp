#include "affsr/synth.hpp"

#include <algorithm>
#include <cmath>

namespace affsr {

namespace {

constexpr double kPi = 3.14159265358979323846;

std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9E3779B97F4A7C15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// Deterministic Gaussian sampler (Box-Muller over splitmix64); the
// standard library distributions are not bit-reproducible across
// implementations.
class GaussianRng {
 public:
  explicit GaussianRng(std::uint64_t seed) : state_(seed) {}

  double uniform01() {
    return (splitmix64(state_) >> 11) * 0x1.0p-53;
  }

  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = uniform01(), u2 = uniform01();
    while (u1 <= 1e-300) u1 = uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    spare_ = r * std::sin(2.0 * kPi * u2);
    have_spare_ = true;
    return r * std::cos(2.0 * kPi * u2);
  }

 private:
  std::uint64_t state_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace

std::vector<AffineMap2D> schedule_to_motions(const MotionSchedule& sched,
                                             MagnificationFactor L) {
  if (sched.n_frames < 1)
    throw std::invalid_argument("schedule_to_motions: need at least one frame");
  if (!(sched.max_zoom > 0.0))
    throw std::invalid_argument("schedule_to_motions: max_zoom must be positive");
  const double align = (L.value - 1) / 2.0;  // SR<->LR grid alignment
  std::vector<AffineMap2D> motions(sched.n_frames);
  for (int k = 0; k < sched.n_frames; ++k) {
    const double f = sched.n_frames == 1
                         ? 0.0
                         : double(sched.n_frames - 1 - k) / (sched.n_frames - 1);
    const double th = f * sched.max_rotation_deg * kPi / 180.0;
    const double z = std::pow(sched.max_zoom, f);
    AffineMap2D w;
    w.m00 = z * std::cos(th);
    w.m01 = -z * std::sin(th);
    w.m10 = z * std::sin(th);
    w.m11 = z * std::cos(th);
    // w(v) = M (v + align - center) + center
    const Vec2 shift{align - sched.center.x, align - sched.center.y};
    w.t = {w.m00 * shift.x + w.m01 * shift.y + sched.center.x,
           w.m10 * shift.x + w.m11 * shift.y + sched.center.y};
    motions[k] = w;
  }
  return motions;
}

SyntheticSequence generate_sequence(const ImageBuffer& hr,
                                    const std::vector<AffineMap2D>& motions,
                                    MagnificationFactor L,
                                    const NoiseSpec& noise) {
  if (!(noise.variance >= 0.0) || !std::isfinite(noise.variance))
    throw std::invalid_argument("generate_sequence: bad noise variance");
  if (motions.empty())
    throw std::invalid_argument("generate_sequence: empty motion list");
  const int Lv = L.value;
  if (hr.grid.width % Lv != 0 || hr.grid.height % Lv != 0)
    throw std::invalid_argument("generate_sequence: HR dims must be divisible by L");
  const GridSpec sr(hr.grid.width, hr.grid.height, 1.0);
  const GridSpec lr(hr.grid.width / Lv, hr.grid.height / Lv, double(Lv));

  SyntheticSequence seq;
  seq.motions = motions;
  const double sigma = std::sqrt(noise.variance);
  for (std::size_t k = 0; k < seq.motions.size(); ++k) {
    const FrameModel fm = assemble_exact(seq.motions[k], lr, sr, L);
    std::vector<double> clean = apply(fm.op, hr.samples);
    seq.clean_frames.emplace_back(lr, clean);
    if (sigma > 0.0) {
      std::uint64_t frame_seed = noise.seed;
      frame_seed ^= 0x9E3779B97F4A7C15ULL * (k + 1);
      GaussianRng rng(frame_seed);
      for (double& v : clean) v += sigma * rng.normal();
    }
    seq.frames.emplace_back(lr, std::move(clean));
  }
  return seq;
}

SyntheticSequence generate_sequence(const ImageBuffer& hr,
                                    const MotionSchedule& sched,
                                    MagnificationFactor L,
                                    const NoiseSpec& noise) {
  return generate_sequence(hr, schedule_to_motions(sched, L), L, noise);
}

PsnrResult psnr(const ImageBuffer& a, const ImageBuffer& b) {
  if (!a.grid.same_dims(b.grid))
    throw std::invalid_argument("psnr: dimension mismatch");
  double e = 0.0;
  for (std::size_t i = 0; i < a.samples.size(); ++i) {
    const double d = a.samples[i] - b.samples[i];
    e += d * d;
  }
  e /= double(a.samples.size());
  PsnrResult r;
  if (e == 0.0) {
    r.identical = true;
    return r;
  }
  r.db = 20.0 * std::log10(255.0 / std::sqrt(e));
  return r;
}

PsnrResult psnr_region(const ImageBuffer& a, const ImageBuffer& b,
                       const std::vector<std::uint8_t>& region) {
  if (!a.grid.same_dims(b.grid) || region.size() != a.samples.size())
    throw std::invalid_argument("psnr_region: dimension mismatch");
  double e = 0.0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < a.samples.size(); ++i) {
    if (!region[i]) continue;
    const double d = a.samples[i] - b.samples[i];
    e += d * d;
    ++count;
  }
  if (count == 0) throw std::invalid_argument("psnr_region: empty region");
  e /= double(count);
  PsnrResult r;
  if (e == 0.0) {
    r.identical = true;
    return r;
  }
  r.db = 20.0 * std::log10(255.0 / std::sqrt(e));
  return r;
}

std::vector<std::uint8_t> coverage_region(const std::vector<FrameModel>& models) {
  const std::vector<double> cov = masked_coverage(models);
  double peak = 0.0;
  for (double c : cov) peak = std::max(peak, c);
  std::vector<std::uint8_t> region(cov.size(), 0);
  for (std::size_t i = 0; i < cov.size(); ++i)
    region[i] = cov[i] >= 0.5 * peak ? 1 : 0;
  return region;
}

ImageBuffer make_test_chart(int width, int height, ChartKind kind) {
  if (width < 16 || height < 16)
    throw std::invalid_argument("make_test_chart: dims must be >= 16");
  ImageBuffer img(GridSpec(width, height, 1.0));
  switch (kind) {
    case ChartKind::checker: {
      const int p = 4;
      for (int v = 0; v < height; ++v)
        for (int u = 0; u < width; ++u)
          img.at(u, v) = ((u / p + v / p) % 2 == 0) ? 255.0 : 0.0;
      break;
    }
    case ChartKind::bars: {
      // horizontal strips of vertical bars, periods 2, 4, 8, 16
      const int periods[4] = {2, 4, 8, 16};
      for (int v = 0; v < height; ++v) {
        const int strip = std::min(3, v * 4 / height);
        const int p = periods[strip];
        for (int u = 0; u < width; ++u)
          img.at(u, v) = ((2 * u / p) % 2 == 0) ? 255.0 : 0.0;
      }
      break;
    }
    case ChartKind::star: {
      const int wedges = 16;
      const double cu = (width - 1) / 2.0, cv = (height - 1) / 2.0;
      for (int v = 0; v < height; ++v)
        for (int u = 0; u < width; ++u) {
          const double th = std::atan2(v - cv, u - cu);  // [-pi, pi]
          const int sector = static_cast<int>(std::floor((th + kPi) / (kPi / wedges)));
          img.at(u, v) = (sector % 2 == 0) ? 255.0 : 0.0;
        }
      break;
    }
  }
  return img;
}

}  // namespace affsr
