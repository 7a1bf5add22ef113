// Copyright 2026 The mnmmol Authors
// SPDX-License-Identifier: Apache-2.0

#include "mri/measurement.hpp"

#include <cmath>
#include <complex>
#include <cstring>
#include <vector>

#include "diffgraph/ops.hpp"
#include "error.hpp"
#include "mri/fft.hpp"

namespace mnm::mri {
namespace {

using cplx = std::complex<double>;

std::uint64_t fnv1a(std::uint64_t h, const Tensor& t) {
  for (double v : t.values()) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, sizeof bits);
    for (int b = 0; b < 8; ++b) {
      h ^= (bits >> (8 * b)) & 0xffu;
      h *= 1099511628211ull;
    }
  }
  return h;
}

void check_image(const char* op, const Tensor& x, const MeasurementModel& mm) {
  if (x.shape() != mm.image_shape()) {
    throw ShapeError(std::string(op) + ": image " + shape_string(x.shape()) + " vs model " +
                     shape_string(mm.image_shape()));
  }
}

// buf = S_c * x
void coil_image(const Tensor& x, const MeasurementModel& mm, std::size_t c, std::vector<cplx>& buf) {
  const std::size_t n = mm.height() * mm.width();
  const double* sr = mm.coil_maps().data() + c * 2 * n;
  const double* si = sr + n;
  const double* xr = x.data();
  const double* xi = xr + n;
  for (std::size_t i = 0; i < n; ++i) buf[i] = cplx(sr[i], si[i]) * cplx(xr[i], xi[i]);
}

// out += conj(S_c) * buf
void accumulate_coil(const std::vector<cplx>& buf, const MeasurementModel& mm, std::size_t c, Tensor& out) {
  const std::size_t n = mm.height() * mm.width();
  const double* sr = mm.coil_maps().data() + c * 2 * n;
  const double* si = sr + n;
  double* orl = out.data();
  double* oim = orl + n;
  for (std::size_t i = 0; i < n; ++i) {
    const cplx v = std::conj(cplx(sr[i], si[i])) * buf[i];
    orl[i] += v.real();
    oim[i] += v.imag();
  }
}

void apply_mask(std::vector<cplx>& buf, const Tensor& mask) {
  for (std::size_t i = 0; i < buf.size(); ++i) buf[i] *= mask[i];
}

}  // namespace

MeasurementModel::MeasurementModel(Tensor mask, Tensor coil_maps, double noise_sigma)
    : mask_ptr_(std::make_shared<const Tensor>(std::move(mask))),
      maps_ptr_(std::make_shared<const Tensor>(std::move(coil_maps))),
      sigma_(noise_sigma) {
  const Tensor& mask_ = *mask_ptr_;
  const Tensor& maps_ = *maps_ptr_;
  if (mask_.rank() != 2) throw ShapeError("MeasurementModel: mask must be [H, W], got " + shape_string(mask_.shape()));
  height_ = mask_.dim(0);
  width_ = mask_.dim(1);
  if (maps_.rank() != 4 || maps_.dim(1) != 2 || maps_.dim(2) != height_ || maps_.dim(3) != width_) {
    throw ShapeError("MeasurementModel: coil maps " + shape_string(maps_.shape()) + " vs mask " +
                     shape_string(mask_.shape()));
  }
  coils_ = maps_.dim(0);
  if (coils_ == 0) throw InvalidArgument("MeasurementModel: need at least one coil");
  if (!(sigma_ >= 0.0)) throw InvalidArgument("MeasurementModel: noise sigma must be >= 0");
  for (double m : mask_.values()) {
    if (m != 0.0 && m != 1.0) throw InvalidArgument("MeasurementModel: mask entries must be 0 or 1");
  }
  const std::size_t n = height_ * width_;
  for (std::size_t p = 0; p < n; ++p) {
    double s = 0.0;
    for (std::size_t c = 0; c < coils_; ++c) {
      const double re = maps_[c * 2 * n + p];
      const double im = maps_[c * 2 * n + n + p];
      s += re * re + im * im;
    }
    if (std::abs(s - 1.0) > 1e-6) {
      throw InvalidArgument("MeasurementModel: coil maps are not normalized at pixel " + std::to_string(p));
    }
  }
  id_ = fnv1a(fnv1a(1469598103934665603ull, mask_), maps_);
}

MeasurementModel MeasurementModel::single_coil(Tensor mask, double noise_sigma) {
  const std::size_t h = mask.dim(0), w = mask.dim(1);
  Tensor maps({1, 2, h, w});
  for (std::size_t i = 0; i < h * w; ++i) maps[i] = 1.0;
  return MeasurementModel(std::move(mask), std::move(maps), noise_sigma);
}

MeasurementModel MeasurementModel::identity(std::size_t height, std::size_t width) {
  Tensor mask({height, width});
  mask.fill(1.0);
  return single_coil(std::move(mask));
}

double MeasurementModel::sampling_fraction() const {
  double s = 0.0;
  for (double m : mask().values()) s += m;
  return s / static_cast<double>(mask().size());
}

KSpaceData apply_A(const Tensor& x, const MeasurementModel& mm) {
  check_image("apply_A", x, mm);
  const std::size_t h = mm.height(), w = mm.width(), n = h * w;
  KSpaceData out{Tensor(mm.kspace_shape()), mm.id()};
  std::vector<cplx> buf(n);
  for (std::size_t c = 0; c < mm.coils(); ++c) {
    coil_image(x, mm, c, buf);
    fft2_unitary(buf, h, w);
    apply_mask(buf, mm.mask());
    double* re = out.samples.data() + c * 2 * n;
    double* im = re + n;
    for (std::size_t i = 0; i < n; ++i) {
      re[i] = buf[i].real();
      im[i] = buf[i].imag();
    }
  }
  return out;
}

Tensor apply_AH(const KSpaceData& b, const MeasurementModel& mm) {
  if (b.model_id != mm.id()) throw ModelMismatch("apply_AH: k-space data was produced by a different measurement model");
  if (b.samples.shape() != mm.kspace_shape()) {
    throw ShapeError("apply_AH: k-space " + shape_string(b.samples.shape()) + " vs model " +
                     shape_string(mm.kspace_shape()));
  }
  const std::size_t h = mm.height(), w = mm.width(), n = h * w;
  Tensor out(mm.image_shape());
  std::vector<cplx> buf(n);
  for (std::size_t c = 0; c < mm.coils(); ++c) {
    const double* re = b.samples.data() + c * 2 * n;
    const double* im = re + n;
    for (std::size_t i = 0; i < n; ++i) buf[i] = cplx(re[i], im[i]) * mm.mask()[i];
    ifft2_unitary(buf, h, w);
    accumulate_coil(buf, mm, c, out);
  }
  return out;
}

Tensor apply_AHA(const Tensor& x, const MeasurementModel& mm) {
  check_image("apply_AHA", x, mm);
  const std::size_t h = mm.height(), w = mm.width(), n = h * w;
  Tensor out(mm.image_shape());
  std::vector<cplx> buf(n);
  for (std::size_t c = 0; c < mm.coils(); ++c) {
    coil_image(x, mm, c, buf);
    fft2_unitary(buf, h, w);
    apply_mask(buf, mm.mask());
    ifft2_unitary(buf, h, w);
    accumulate_coil(buf, mm, c, out);
  }
  return out;
}

ad::Var apply_AHA(ad::Var x, const MeasurementModel& mm) {
  // by value: the graph may outlive the caller's model object
  auto op = [mm](const Tensor& v) { return apply_AHA(v, mm); };
  return ad::linear("AHA", x, op, op);
}

KSpaceData bind_kspace(Tensor samples, const MeasurementModel& mm) {
  if (samples.shape() != mm.kspace_shape()) {
    throw ShapeError("bind_kspace: k-space " + shape_string(samples.shape()) + " vs model " +
                     shape_string(mm.kspace_shape()));
  }
  const std::size_t n = mm.height() * mm.width();
  for (std::size_t c = 0; c < 2 * mm.coils(); ++c) {
    for (std::size_t i = 0; i < n; ++i) samples[c * n + i] *= mm.mask()[i];
  }
  return KSpaceData{std::move(samples), mm.id()};
}

}  // namespace mnm::mri
