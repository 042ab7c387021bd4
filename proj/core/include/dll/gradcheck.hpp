#pragma once

#include <functional>
#include <string>
#include <vector>

#include "dll/param.hpp"

namespace dll {

struct GradCheckReport {
  double max_rel_err = 0.0;
  double max_abs_err = 0.0;
  std::string worst_key;
  std::size_t checked = 0;

  bool ok(double rel_tol) const { return max_rel_err <= rel_tol; }
};

// Central-difference check of `analytic` against the loss evaluated by
// `loss_eval`, which must read the current tensor values of `groups`.
// Components where both gradients are below `abs_floor` are compared
// absolutely (the relative error of two near-zero numbers is noise).
// loss_eval is the independent side of the check: it must not reuse the
// reverse-mode result being verified.
GradCheckReport check_gradients(const std::function<double()>& loss_eval,
                                const std::vector<ParamGroup*>& groups,
                                const GradientMap& analytic,
                                double epsilon = 1e-5,
                                double abs_floor = 1e-7);

}  // namespace dll
