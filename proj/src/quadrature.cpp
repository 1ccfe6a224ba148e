#include "predict/quadrature.hpp"

#include <cmath>

#include "predict/errors.hpp"

namespace predict {

double simpson_fixed(const std::function<double(double)>& f, double a, double b,
                     std::size_t panels) {
    if (panels < 2) panels = 2;
    if (panels % 2 != 0) ++panels;
    const double h = (b - a) / static_cast<double>(panels);
    double acc = f(a) + f(b);
    for (std::size_t i = 1; i < panels; ++i) {
        acc += f(a + h * static_cast<double>(i)) * (i % 2 == 1 ? 4.0 : 2.0);
    }
    return acc * h / 3.0;
}

double simpson_adaptive(const std::function<double(double)>& f, double a, double b, double abs_tol,
                        std::size_t initial_panels) {
    constexpr std::size_t kMaxPanels = 1u << 24;
    std::size_t panels = initial_panels < 2 ? 2 : initial_panels;
    double coarse = simpson_fixed(f, a, b, panels);
    while (panels < kMaxPanels) {
        panels *= 2;
        const double fine = simpson_fixed(f, a, b, panels);
        if (std::fabs(fine - coarse) < abs_tol) return fine;
        coarse = fine;
    }
    throw NumericalValidationError("Simpson refinement did not reach the requested tolerance");
}

}  // namespace predict
