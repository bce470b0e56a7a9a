#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "stav/errors.hpp"

namespace stav {

// Dense row-major array of doubles, rank 1..5. Axis convention across the
// model is (set, channel, height, width, time) with trailing axes fastest.
class Tensor {
public:
    Tensor() = default;
    explicit Tensor(std::vector<int> shape);  // zero-filled
    static Tensor filled(std::vector<int> shape, double v);

    int rank() const { return static_cast<int>(shape_.size()); }
    int extent(int axis) const { return shape_[static_cast<std::size_t>(axis)]; }
    const std::vector<int>& shape() const { return shape_; }
    std::size_t size() const { return data_.size(); }
    bool empty() const { return data_.empty(); }

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }

    double operator[](std::size_t i) const { return data_[i]; }
    double& operator[](std::size_t i) { return data_[i]; }

    double& at2(int i, int j) { return data_[idx2(i, j)]; }
    double at2(int i, int j) const { return data_[idx2(i, j)]; }
    double& at3(int i, int j, int k) { return data_[idx3(i, j, k)]; }
    double at3(int i, int j, int k) const { return data_[idx3(i, j, k)]; }
    double& at4(int i, int j, int k, int l) { return data_[idx4(i, j, k, l)]; }
    double at4(int i, int j, int k, int l) const { return data_[idx4(i, j, k, l)]; }

    std::size_t idx2(int i, int j) const {
        return std::size_t(i) * shape_[1] + j;
    }
    std::size_t idx3(int i, int j, int k) const {
        return (std::size_t(i) * shape_[1] + j) * shape_[2] + k;
    }
    std::size_t idx4(int i, int j, int k, int l) const {
        return ((std::size_t(i) * shape_[1] + j) * shape_[2] + k) * shape_[3] + l;
    }

    bool same_shape(const Tensor& o) const { return shape_ == o.shape_; }
    bool all_finite() const;
    void fill(double v);

private:
    std::vector<int> shape_;
    std::vector<double> data_;
};

std::string shape_str(const std::vector<int>& shape);

}  // namespace stav
