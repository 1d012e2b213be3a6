// Copyright 2026 The TEXP Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef TEXP_TENSOR_H_
#define TEXP_TENSOR_H_

#include <stdexcept>

#include <Eigen/Dense>

namespace texp {

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

// Dense image in canonical layout: channel-major, row-major within a channel.
// Element (c, r, col) lives at index (c * height + r) * width + col.
template <typename Scalar>
struct BasicImageTensor {
  int height = 0;
  int width = 0;
  int channels = 0;
  Vector<Scalar> data;

  BasicImageTensor() = default;
  BasicImageTensor(int h, int w, int c)
      : height(h), width(w), channels(c), data(Vector<Scalar>::Zero(
                                              static_cast<Eigen::Index>(h) * w * c)) {
    if (h < 1 || w < 1 || c < 1) {
      throw std::invalid_argument("image dimensions must be positive");
    }
  }

  Eigen::Index size() const { return data.size(); }
  Eigen::Index Index(int c, int r, int col) const {
    return (static_cast<Eigen::Index>(c) * height + r) * width + col;
  }
  Scalar& operator()(int c, int r, int col) { return data[Index(c, r, col)]; }
  Scalar operator()(int c, int r, int col) const { return data[Index(c, r, col)]; }
  bool SameShape(const BasicImageTensor& other) const {
    return height == other.height && width == other.width &&
           channels == other.channels;
  }
};

using ImageTensor = BasicImageTensor<double>;

struct ConvGeometry {
  int kernel = 3;
  int stride = 1;
  int padding = 1;

  // Output extent along one axis; may be <= 0 for infeasible geometry.
  int OutputExtent(int input_extent) const {
    return (input_extent + 2 * padding - kernel) / stride + 1;
  }
  void Validate() const;
};

// Patches of one image, one per row (L x D), with D = k * k * C. Within a
// patch the layout matches the image: channel-major, then kernel row, then
// kernel column.
template <typename Scalar>
struct BasicPatchGrid {
  ConvGeometry geometry;
  int input_height = 0;
  int input_width = 0;
  int input_channels = 0;
  int out_height = 0;
  int out_width = 0;
  Matrix<Scalar> patches;

  int num_locations() const { return out_height * out_width; }
  int patch_dim() const {
    return geometry.kernel * geometry.kernel * input_channels;
  }
};

using PatchGrid = BasicPatchGrid<double>;

// Zero-padded window extraction. Rejects even kernels and geometries with no
// valid site.
template <typename Scalar>
BasicPatchGrid<Scalar> ExtractPatches(const BasicImageTensor<Scalar>& image,
                                      const ConvGeometry& geometry) {
  geometry.Validate();
  BasicPatchGrid<Scalar> grid;
  grid.geometry = geometry;
  grid.input_height = image.height;
  grid.input_width = image.width;
  grid.input_channels = image.channels;
  grid.out_height = geometry.OutputExtent(image.height);
  grid.out_width = geometry.OutputExtent(image.width);
  if (grid.out_height < 1 || grid.out_width < 1) {
    throw std::invalid_argument("convolution geometry yields no locations");
  }
  const int k = geometry.kernel;
  grid.patches = Matrix<Scalar>::Zero(grid.num_locations(), grid.patch_dim());
  for (int orow = 0; orow < grid.out_height; ++orow) {
    for (int ocol = 0; ocol < grid.out_width; ++ocol) {
      const int l = orow * grid.out_width + ocol;
      const int top = orow * geometry.stride - geometry.padding;
      const int left = ocol * geometry.stride - geometry.padding;
      for (int c = 0; c < image.channels; ++c) {
        for (int kr = 0; kr < k; ++kr) {
          const int r = top + kr;
          if (r < 0 || r >= image.height) continue;
          for (int kc = 0; kc < k; ++kc) {
            const int col = left + kc;
            if (col < 0 || col >= image.width) continue;
            grid.patches(l, (c * k + kr) * k + kc) = image(c, r, col);
          }
        }
      }
    }
  }
  return grid;
}

// Adjoint of ExtractPatches: accumulates each patch row back onto the image
// positions it was read from (overlaps add, padding is dropped).
template <typename Scalar>
BasicImageTensor<Scalar> ScatterPatches(const BasicPatchGrid<Scalar>& shape,
                                        const Matrix<Scalar>& patch_values) {
  if (patch_values.rows() != shape.num_locations() ||
      patch_values.cols() != shape.patch_dim()) {
    throw std::invalid_argument("patch matrix does not match grid shape");
  }
  BasicImageTensor<Scalar> image(shape.input_height, shape.input_width,
                                 shape.input_channels);
  const ConvGeometry& g = shape.geometry;
  const int k = g.kernel;
  for (int orow = 0; orow < shape.out_height; ++orow) {
    for (int ocol = 0; ocol < shape.out_width; ++ocol) {
      const int l = orow * shape.out_width + ocol;
      const int top = orow * g.stride - g.padding;
      const int left = ocol * g.stride - g.padding;
      for (int c = 0; c < image.channels; ++c) {
        for (int kr = 0; kr < k; ++kr) {
          const int r = top + kr;
          if (r < 0 || r >= image.height) continue;
          for (int kc = 0; kc < k; ++kc) {
            const int col = left + kc;
            if (col < 0 || col >= image.width) continue;
            image(c, r, col) += patch_values(l, (c * k + kr) * k + kc);
          }
        }
      }
    }
  }
  return image;
}

// Rebuilds an image from the center element of every patch. Only meaningful
// for stride 1 and padding (k - 1) / 2, where each site is centered on a pixel.
template <typename Scalar>
BasicImageTensor<Scalar> ReassembleCenters(const BasicPatchGrid<Scalar>& grid) {
  const ConvGeometry& g = grid.geometry;
  if (g.stride != 1 || g.padding != (g.kernel - 1) / 2) {
    throw std::invalid_argument("center reassembly needs a same-size geometry");
  }
  BasicImageTensor<Scalar> image(grid.input_height, grid.input_width,
                                 grid.input_channels);
  const int k = g.kernel;
  const int center = (k - 1) / 2;
  for (int r = 0; r < image.height; ++r) {
    for (int col = 0; col < image.width; ++col) {
      const int l = r * grid.out_width + col;
      for (int c = 0; c < image.channels; ++c) {
        image(c, r, col) = grid.patches(l, (c * k + center) * k + center);
      }
    }
  }
  return image;
}

}  // namespace texp

#endif  // TEXP_TENSOR_H_
