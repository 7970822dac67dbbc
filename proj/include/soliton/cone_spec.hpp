#pragma once

#include <cstddef>
#include <vector>

namespace soliton {

/// Discrete data of a Calabi-Yau cone: complex dimension, the soliton
/// parameter a = lim φ at the apex, the basic spectrum of the link and
/// the Sasaki volume of the link.
struct ConeSpec {
    int n = 2;
    double a = 0.0;
    std::vector<double> link_spectrum{0.0};
    double link_volume = 1.0;

    /// Smallest admissible first nonzero basic eigenvalue for a Ricci-flat cone.
    static double eigenvalue_floor(int n);

    /// Throws InvalidArgument naming the first violated invariant.
    void validate() const;
};

/// Uniform grid on [t_min, t_max].
class RadialGrid {
public:
    RadialGrid(double t_min, double t_max, std::size_t count);

    double t_min() const noexcept { return t_min_; }
    double t_max() const noexcept { return t_max_; }
    std::size_t size() const noexcept { return nodes_.size(); }
    double spacing() const noexcept { return h_; }
    double operator[](std::size_t k) const noexcept { return nodes_[k]; }
    const std::vector<double>& nodes() const noexcept { return nodes_; }

private:
    double t_min_;
    double t_max_;
    double h_;
    std::vector<double> nodes_;
};

}  // namespace soliton
