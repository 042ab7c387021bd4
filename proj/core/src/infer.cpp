#include "dll/infer.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "dll/error.hpp"

namespace dll {

double default_label_init(TaskKind task) {
  return task == TaskKind::BinaryClassification ? 0.5 : 1.0;
}

int threshold_class(double probability) { return probability >= 0.5 ? 1 : 0; }

namespace {

LabelEstimate make_estimate(double value, TaskKind task) {
  LabelEstimate e;
  e.value = value;
  if (task == TaskKind::BinaryClassification) {
    e.label = threshold_class(value);
  }
  return e;
}

void validate_inference_config(const InferenceConfig& inference) {
  if (inference.iterations < 1) {
    throw ContractError("inference: iteration cap must be >= 1");
  }
  if (inference.epsilon && *inference.epsilon < 0.0) {
    throw ContractError("inference: epsilon must be >= 0");
  }
}

}  // namespace

DirectResult direct_infer(const Sample& sample, const ModelConfig& config,
                          const DualTowerParams& params) {
  const PresenceMask u = presence_indicator(sample);
  if (u.y1_present == u.y2_present) {
    throw ContractError(
        "direct_infer: sample must carry exactly one label");
  }
  DirectResult out;
  if (u.y1_present) {
    out.y2 = make_estimate(f_eval(config, params, sample.x, *sample.y1),
                           config.task);
  } else {
    out.y1 = make_estimate(g_eval(config, params, sample.x, *sample.y2),
                           config.task);
  }
  return out;
}

SolveResult alternate_solve(const std::function<double(double)>& f,
                            const std::function<double(double)>& g,
                            const InferenceConfig& inference) {
  validate_inference_config(inference);
  SolveResult out;
  double y1 = inference.y0;
  double y2 = inference.y0;
  out.trace.iterates.reserve(
      inference.epsilon ? 16 : static_cast<std::size_t>(inference.iterations));
  for (int it = 1; it <= inference.iterations; ++it) {
    const double prev_y1 = y1;
    const double prev_y2 = y2;
    y2 = f(y1);
    y1 = g(y2);
    out.trace.iterates.emplace_back(y1, y2);
    if (inference.epsilon) {
      const double delta =
          std::max(std::abs(y1 - prev_y1), std::abs(y2 - prev_y2));
      if (delta < *inference.epsilon) {
        out.trace.converged_at = static_cast<std::size_t>(it);
        break;
      }
    }
  }
  out.y1 = y1;
  out.y2 = y2;
  return out;
}

AlternateResult alternate_infer(const Sample& sample,
                                const ModelConfig& config,
                                const DualTowerParams& params,
                                const InferenceConfig& inference) {
  const PresenceMask u = presence_indicator(sample);
  if (u.y1_present || u.y2_present) {
    throw ContractError("alternate_infer: sample must carry no labels");
  }
  const TowerEvaluator towers(config, params, sample.x);
  const SolveResult solved = alternate_solve(
      [&towers](double y1) { return towers.f(y1); },
      [&towers](double y2) { return towers.g(y2); }, inference);
  AlternateResult out;
  out.y1 = make_estimate(solved.y1, config.task);
  out.y2 = make_estimate(solved.y2, config.task);
  out.trace = solved.trace;
  return out;
}

double equilibrium_residual(const Sample& sample, const ModelConfig& config,
                            const DualTowerParams& params,
                            const AlternateResult& result) {
  const double probe = f_eval(config, params, sample.x, result.y1.value);
  return std::abs(probe - result.y2.value);
}

DatasetInference infer_dataset(const Dataset& dataset,
                               const ModelConfig& config,
                               const DualTowerParams& params,
                               const InferenceConfig& inference,
                               bool keep_traces) {
  DatasetInference out;
  for (std::size_t i = 0; i < dataset.samples.size(); ++i) {
    const Sample& s = dataset.samples[i];
    const PresenceMask u = presence_indicator(s);
    if (u.y1_present && u.y2_present) continue;
    if (u.y1_present || u.y2_present) {
      out.singles.push_back({i, direct_infer(s, config, params)});
      continue;
    }
    AlternateResult r = alternate_infer(s, config, params, inference);
    DatasetInference::DoublePrediction dp;
    dp.index = i;
    dp.y1 = r.y1;
    dp.y2 = r.y2;
    dp.converged_at = r.trace.converged_at;
    if (r.trace.converged_at) {
      ++out.converged_count;
      ++out.iteration_histogram[*r.trace.converged_at];
    }
    out.doubles.push_back(dp);
    if (keep_traces) {
      out.traces.emplace_back(i, std::move(r.trace));
    }
  }
  return out;
}

void write_trace_csv(const std::string& path, const DatasetInference& result) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("trace: cannot write '" + path + "'");
  out << "sample_id,iteration,y1_hat,y2_hat\n";
  char buf[96];
  for (const auto& [index, trace] : result.traces) {
    for (std::size_t it = 0; it < trace.iterates.size(); ++it) {
      std::snprintf(buf, sizeof(buf), "%zu,%zu,%.17g,%.17g\n", index, it + 1,
                    trace.iterates[it].first, trace.iterates[it].second);
      out << buf;
    }
  }
}

}  // namespace dll
