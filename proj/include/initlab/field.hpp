#pragma once

#include <cassert>
#include <cstddef>
#include <vector>

namespace initlab {

/// Dense row-major 2D array of doubles (x index fastest).
class Field2D {
public:
    Field2D() = default;
    Field2D(int nx, int ny, double fill = 0.0)
        : nx_(nx), ny_(ny), data_(static_cast<std::size_t>(nx) * ny, fill) {}

    int nx() const { return nx_; }
    int ny() const { return ny_; }

    double& operator()(int i, int j) {
        assert(i >= 0 && i < nx_ && j >= 0 && j < ny_);
        return data_[static_cast<std::size_t>(j) * nx_ + i];
    }
    double operator()(int i, int j) const {
        assert(i >= 0 && i < nx_ && j >= 0 && j < ny_);
        return data_[static_cast<std::size_t>(j) * nx_ + i];
    }

    void fill(double value) { data_.assign(data_.size(), value); }

    std::vector<double>& raw() { return data_; }
    const std::vector<double>& raw() const { return data_; }

    bool same_shape(const Field2D& other) const {
        return nx_ == other.nx_ && ny_ == other.ny_;
    }

private:
    int nx_ = 0;
    int ny_ = 0;
    std::vector<double> data_;
};

}  // namespace initlab
