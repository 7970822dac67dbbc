#include "soliton/cone_spec.hpp"

#include "soliton/errors.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace soliton {

double ConeSpec::eigenvalue_floor(int n) {
    // 2n(1 + 1/(2n-3)); at n = 2 this reads 2n·2 = 8.
    return 2.0 * n * (1.0 + 1.0 / (2.0 * n - 3.0));
}

void ConeSpec::validate() const {
    if (n < 2) {
        throw Error(ErrorKind::InvalidArgument, "n >= 2 required (got n = " + std::to_string(n) + ")");
    }
    if (!(a >= 0.0) || !std::isfinite(a)) {
        throw Error(ErrorKind::InvalidArgument, "a >= 0 required (got a = " + std::to_string(a) + ")");
    }
    if (!(link_volume > 0.0) || !std::isfinite(link_volume)) {
        throw Error(ErrorKind::InvalidArgument, "link_volume > 0 required");
    }
    if (link_spectrum.empty() || link_spectrum.front() != 0.0) {
        throw Error(ErrorKind::InvalidArgument, "link_spectrum must start with lambda_0 = 0");
    }
    if (!std::is_sorted(link_spectrum.begin(), link_spectrum.end())) {
        throw Error(ErrorKind::InvalidArgument, "link_spectrum must be sorted");
    }
    if (std::count(link_spectrum.begin(), link_spectrum.end(), 0.0) != 1) {
        throw Error(ErrorKind::InvalidArgument, "link_spectrum must contain lambda_0 = 0 exactly once");
    }
    if (link_spectrum.size() > 1 && link_spectrum[1] < eigenvalue_floor(n)) {
        throw Error(ErrorKind::InvalidArgument,
                    "lambda_1 >= 2n(1 + 1/(2n-3)) = " + std::to_string(eigenvalue_floor(n)) +
                        " required (got " + std::to_string(link_spectrum[1]) + ")");
    }
}

RadialGrid::RadialGrid(double t_min, double t_max, std::size_t count)
    : t_min_(t_min), t_max_(t_max), h_(0.0) {
    if (!std::isfinite(t_min) || !std::isfinite(t_max) || !(t_min < t_max)) {
        throw Error(ErrorKind::InvalidArgument, "grid requires t_min < t_max");
    }
    if (count < 3) throw Error(ErrorKind::InvalidArgument, "grid requires count >= 3");
    h_ = (t_max - t_min) / static_cast<double>(count - 1);
    nodes_.resize(count);
    for (std::size_t k = 0; k < count; ++k) {
        nodes_[k] = t_min + static_cast<double>(k) * h_;
    }
    nodes_.back() = t_max;
}

}  // namespace soliton
