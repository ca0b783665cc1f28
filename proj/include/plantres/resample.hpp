#pragma once

#include <array>
#include <utility>

#include "plantres/raster.hpp"
#include "plantres/types.hpp"

namespace plantres {

struct DegradeParams {
  double gaussian_sigma = 0.63;
  int gaussian_window = 9;
  int motion_kernel = 3;
  double motion_angle_deg = 45.0;
  int decimation_factor = 2;
};

void validate(const DegradeParams& p);

/// Normalized isotropic Gaussian on a window x window grid.
Kernel gaussian_kernel(double sigma, int window);

/// Equal weights on the rasterized line through the kernel center. The angle
/// is counter-clockwise from +x with rows as the y axis, so 0 is the middle
/// row and 45 the main diagonal (top-left to bottom-right).
Kernel motion_blur_kernel(int size, double angle_deg);

/// Per-channel 2D convolution, edge-replicate padding, results rounded half
/// away from zero and clamped to [0, 255].
Raster convolve(const Raster& img, const Kernel& kernel);

/// Keeps every factor-th pixel starting at (0, 0); output is floor(dims/factor).
Raster decimate(const Raster& img, int factor);

/// Every coordinate multiplied by factor.
Annotation scale_boxes(const Annotation& a, double factor);

/// Gaussian blur, then motion blur, then decimation; boxes scale by
/// 1/decimation_factor. The caller multiplies the image GSD by the factor.
std::pair<Raster, Annotation> degrade(const Raster& img, const Annotation& boxes,
                                      const DegradeParams& p = {});

/// Separable cubic convolution (a = -0.5), pixel-center aligned, with
/// edge-replicated taps. Output size is round(dims * factor).
Raster bicubic_resize(const Raster& img, double factor);

/// Cubic convolution weight for distance x with parameter a.
double cubic_weight(double x, double a = -0.5);

/// Population variance of each channel.
std::array<double, 3> image_variance(const Raster& img);

}  // namespace plantres
