#pragma once

#include <functional>

namespace predict {

// Composite Simpson rule with `panels` equal panels (panels must be even
// and >= 2... it is rounded up to even).
double simpson_fixed(const std::function<double(double)>& f, double a, double b,
                     std::size_t panels);

// Panel-doubling composite Simpson: starts at `initial_panels`, doubles
// until two successive estimates differ by less than abs_tol. Returns the
// finer estimate.
double simpson_adaptive(const std::function<double(double)>& f, double a, double b, double abs_tol,
                        std::size_t initial_panels);

}  // namespace predict
