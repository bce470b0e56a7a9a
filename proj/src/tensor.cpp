#include "stav/tensor.hpp"

#include <cmath>

namespace stav {

namespace {
std::size_t checked_size(const std::vector<int>& shape) {
    if (shape.empty() || shape.size() > 5) {
        throw shape_error("tensor rank must be 1..5, got " + shape_str(shape));
    }
    std::size_t n = 1;
    for (int e : shape) {
        if (e <= 0) throw shape_error("tensor extents must be positive, got " + shape_str(shape));
        n *= static_cast<std::size_t>(e);
        if (n > (std::size_t(1) << 31)) {
            throw shape_error("tensor too large: " + shape_str(shape));
        }
    }
    return n;
}
}  // namespace

Tensor::Tensor(std::vector<int> shape) : shape_(std::move(shape)), data_(checked_size(shape_), 0.0) {}

Tensor Tensor::filled(std::vector<int> shape, double v) {
    Tensor t(std::move(shape));
    t.fill(v);
    return t;
}

void Tensor::fill(double v) {
    for (double& x : data_) x = v;
}

bool Tensor::all_finite() const {
    for (double x : data_) {
        if (!std::isfinite(x)) return false;
    }
    return true;
}

std::string shape_str(const std::vector<int>& shape) {
    std::string s = "(";
    for (std::size_t i = 0; i < shape.size(); ++i) {
        if (i) s += ", ";
        s += std::to_string(shape[i]);
    }
    s += ")";
    return s;
}

}  // namespace stav
