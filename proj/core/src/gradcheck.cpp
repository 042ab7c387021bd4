#include "dll/gradcheck.hpp"

#include <cmath>

#include "dll/error.hpp"

namespace dll {

GradCheckReport check_gradients(const std::function<double()>& loss_eval,
                                const std::vector<ParamGroup*>& groups,
                                const GradientMap& analytic, double epsilon,
                                double abs_floor) {
  GradCheckReport report;
  for (ParamGroup* group : groups) {
    for (auto& [key, tensor] : group->entries()) {
      const Tensor* grad = analytic.find(group->name(), key);
      for (std::size_t i = 0; i < tensor.size(); ++i) {
        const double original = tensor[i];
        tensor[i] = original + epsilon;
        const double up = loss_eval();
        tensor[i] = original - epsilon;
        const double down = loss_eval();
        tensor[i] = original;

        const double fd = (up - down) / (2.0 * epsilon);
        const double an = grad ? (*grad)[i] : 0.0;
        const double abs_err = std::abs(fd - an);
        const double denom = std::max(std::abs(fd), std::abs(an));
        report.checked++;
        if (abs_err > report.max_abs_err) report.max_abs_err = abs_err;
        if (denom < abs_floor) continue;  // both ~0: absolute check only
        const double rel = abs_err / denom;
        if (rel > report.max_rel_err) {
          report.max_rel_err = rel;
          report.worst_key =
              GradientMap::qualify(group->name(), key) + "[" +
              std::to_string(i) + "]";
        }
      }
    }
  }
  return report;
}

}  // namespace dll
