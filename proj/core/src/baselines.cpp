#include "dll/baselines.hpp"

#include <algorithm>

#include "dll/error.hpp"
#include "dll/rng.hpp"

namespace dll {

std::string to_string(BaselineKind kind) {
  switch (kind) {
    case BaselineKind::ID: return "ID";
    case BaselineKind::COL: return "COL";
    case BaselineKind::SSL: return "SSL";
    case BaselineKind::LS: return "LS";
    case BaselineKind::DSML: return "DSML";
    case BaselineKind::DSML_REV: return "DSML_REV";
  }
  return "?";
}

BaselineKind baseline_kind_from_string(const std::string& s) {
  if (s == "ID") return BaselineKind::ID;
  if (s == "COL") return BaselineKind::COL;
  if (s == "SSL") return BaselineKind::SSL;
  if (s == "LS") return BaselineKind::LS;
  if (s == "DSML") return BaselineKind::DSML;
  if (s == "DSML_REV" || s == "DSML-rev" || s == "DSML_rev") {
    return BaselineKind::DSML_REV;
  }
  throw ConfigError("unknown baseline '" + s + "'");
}

namespace {

std::uint64_t derive_seed(std::uint64_t base, const std::string& name) {
  return Rng(base).substream(name).seed();
}

// Single-output widths: encoder trunk followed by one head, so a component
// has the same capacity as one branch of the two-head model.
MLPSpec component_spec(const ModelConfig& model, bool conditioned) {
  std::vector<int> widths = model.encoder_widths;
  const MLPSpec head = head_spec(model);
  widths.insert(widths.end(), head.widths.begin() + 1, head.widths.end());
  if (conditioned) widths.front() += 1;
  return MLPSpec{std::move(widths), model.hidden_activation, head.output};
}

struct FitRow {
  const std::vector<double>* x = nullptr;
  double cond = 0.0;  // conditioning label, when the net is conditioned
  double target = 0.0;
};

std::vector<double> component_input(const ComponentNet& net,
                                    const std::vector<double>& x,
                                    double cond) {
  std::vector<double> in = x;
  if (net.label_conditioned) in.push_back(cond);
  return in;
}

double component_predict(const ComponentNet& net, const std::vector<double>& x,
                         double cond = 0.0) {
  const std::vector<double> in = component_input(net, x, cond);
  return mlp_eval(net.spec, net.params, "net.", in)[0];
}

// Point prediction relayed between stages: thresholded class for
// classification, raw value for regression.
double point_value(TaskKind task, double prediction) {
  if (task == TaskKind::BinaryClassification) {
    return prediction >= 0.5 ? 1.0 : 0.0;
  }
  return prediction;
}

ComponentNet fit_component(const std::string& role, const Dataset& data,
                           const std::vector<FitRow>& rows, bool conditioned,
                           const BaselineConfig& config,
                           const std::string& stage_name) {
  if (rows.empty()) {
    throw ConfigError("baseline stage " + role + ": no training samples");
  }
  ComponentNet net;
  net.role = role;
  net.spec = component_spec(config.model, conditioned);
  net.label_conditioned = conditioned;
  net.params = ParamGroup("component");
  net.train_count = rows.size();
  {
    Rng rng(derive_seed(config.seed, stage_name + ":init"));
    init_mlp_params(net.spec, net.params, "net.", rng);
  }

  const TrainConfig& t = config.train;
  const std::size_t batch_size = static_cast<std::size_t>(t.batch_size);
  const double inv_b = 1.0 / static_cast<double>(batch_size);
  Rng shuffle_rng(derive_seed(config.seed, stage_name + ":shuffle"));

  std::vector<std::size_t> pool(rows.size());
  for (std::size_t i = 0; i < pool.size(); ++i) pool[i] = i;

  for (int epoch = 0; epoch < t.epochs; ++epoch) {
    shuffle(pool, shuffle_rng);
    for (std::size_t start = 0; start < pool.size(); start += batch_size) {
      const std::size_t count = std::min(batch_size, pool.size() - start);
      Tape tape;
      tape.register_group(net.params);
      Var loss = tape.constant(0.0);
      bool any = false;
      for (std::size_t k = 0; k < count; ++k) {
        const FitRow& row = rows[pool[start + k]];
        const std::vector<double> in =
            component_input(net, *row.x, row.cond);
        Var xin = tape.constant(Tensor::vector(in));
        Var pred = tape.at(mlp_forward(tape, net.spec, net.params, "net.", xin), 0);
        Var term = task_loss(tape, data.task, t.class_weights, pred, row.target);
        loss = any ? tape.add(loss, term) : term;
        any = true;
      }
      const GradientMap grads = tape.backward(tape.scale(loss, inv_b));
      sgd_step(net.params, grads, t.learning_rate);
    }
  }
  return net;
}

Dataset labeled_subset(const Dataset& data, const DatasetSplit& split) {
  Dataset out;
  out.task = data.task;
  out.feature_dim = data.feature_dim;
  for (std::size_t i : split.labeled) out.samples.push_back(data.samples[i]);
  return out;
}

MultiOutputNet fit_multi_output(const std::string& role, const Dataset& data,
                                const BaselineConfig& config,
                                const std::string& stage_name) {
  if (data.samples.empty()) {
    throw ConfigError("baseline stage " + role + ": no training samples");
  }
  MultiOutputNet net;
  net.role = role;
  net.train_count = data.samples.size();
  ModelConfig model = config.model;
  model.seed = derive_seed(config.seed, stage_name + ":init");
  net.params = init_multitask(model);
  TrainConfig t = config.train;
  t.seed = derive_seed(config.seed, stage_name + ":shuffle");
  pretrain_multitask(data, model, net.params, t);
  return net;
}

Dataset swap_labels(const Dataset& data) {
  Dataset out = data;
  for (Sample& s : out.samples) std::swap(s.y1, s.y2);
  return out;
}

BaselinePredictor fit_dsml(const Dataset& data, const BaselineConfig& config) {
  const DatasetSplit split = partition(data);
  BaselinePredictor out;
  out.task = data.task;
  out.model = config.model;

  // Stage 1: y2 from x on rows where y2 is present.
  std::vector<FitRow> rows1;
  for (std::size_t i : split.labeled) {
    rows1.push_back({&data.samples[i].x, 0.0, *data.samples[i].y2});
  }
  for (std::size_t i : split.y2_only) {
    rows1.push_back({&data.samples[i].x, 0.0, *data.samples[i].y2});
  }
  ComponentNet m1 =
      fit_component("p(y2|x)", data, rows1, false, config, "fit:p_y2|x");

  // Stage 2: y1 from (x, y2) on rows where y1 is present; the semi-labeled
  // rows use stage-1 point predictions as the conditioning value.
  std::vector<FitRow> rows2;
  std::vector<double> imputed_y2(data.samples.size(), 0.0);
  for (std::size_t i : split.labeled) {
    rows2.push_back({&data.samples[i].x, *data.samples[i].y2,
                     *data.samples[i].y1});
  }
  for (std::size_t i : split.y1_only) {
    imputed_y2[i] =
        point_value(data.task, component_predict(m1, data.samples[i].x));
    rows2.push_back({&data.samples[i].x, imputed_y2[i], *data.samples[i].y1});
  }
  ComponentNet m2 =
      fit_component("p(y1|x,y2)", data, rows2, true, config, "fit:p_y1|x,y2");

  // Stage 3: y2 from (x, y1) on every label-bearing row. Conditioning y1
  // comes from stage 2 where it is missing; targets on y1-only rows are
  // the stage-1 predictions.
  std::vector<FitRow> rows3;
  for (std::size_t i : split.labeled) {
    rows3.push_back({&data.samples[i].x, *data.samples[i].y1,
                     *data.samples[i].y2});
  }
  for (std::size_t i : split.y1_only) {
    rows3.push_back({&data.samples[i].x, *data.samples[i].y1, imputed_y2[i]});
  }
  for (std::size_t i : split.y2_only) {
    const double y1_hat = point_value(
        data.task,
        component_predict(m2, data.samples[i].x, *data.samples[i].y2));
    rows3.push_back({&data.samples[i].x, y1_hat, *data.samples[i].y2});
  }
  ComponentNet m3 =
      fit_component("p(y2|x,y1)", data, rows3, true, config, "fit:p_y2|x,y1");

  out.components = {std::move(m1), std::move(m2), std::move(m3)};
  return out;
}

BaselinePrediction predict_dsml(const BaselinePredictor& p, const Sample& s,
                                const PresenceMask& u) {
  const ComponentNet& m1 = p.components[0];
  const ComponentNet& m2 = p.components[1];
  const ComponentNet& m3 = p.components[2];
  BaselinePrediction out;
  if (u.y1_present && !u.y2_present) {
    out.y2 = component_predict(m3, s.x, *s.y1);
  } else if (u.y2_present && !u.y1_present) {
    out.y1 = component_predict(m2, s.x, *s.y2);
  } else {
    const double y2_stage1 = point_value(p.task, component_predict(m1, s.x));
    const double y1_hat = component_predict(m2, s.x, y2_stage1);
    out.y1 = y1_hat;
    out.y2 = component_predict(m3, s.x, point_value(p.task, y1_hat));
  }
  return out;
}

Sample swap_sample(const Sample& s) {
  Sample out = s;
  std::swap(out.y1, out.y2);
  return out;
}

}  // namespace

BaselinePredictor baseline_fit(BaselineKind kind, const Dataset& trainData,
                               const BaselineConfig& config) {
  validate_model_config(config.model);
  const DatasetSplit split = partition(trainData);
  BaselinePredictor out;
  out.kind = kind;
  out.task = trainData.task;
  out.model = config.model;

  switch (kind) {
    case BaselineKind::ID: {
      std::vector<FitRow> rows1, rows2;
      for (std::size_t i = 0; i < trainData.samples.size(); ++i) {
        const Sample& s = trainData.samples[i];
        if (s.y1) rows1.push_back({&s.x, 0.0, *s.y1});
        if (s.y2) rows2.push_back({&s.x, 0.0, *s.y2});
      }
      out.components.push_back(fit_component("p(y1|x)", trainData, rows1,
                                             false, config, "fit:p_y1|x"));
      out.components.push_back(fit_component("p(y2|x)", trainData, rows2,
                                             false, config, "fit:p_y2|x"));
      return out;
    }
    case BaselineKind::COL: {
      out.multi_components.push_back(fit_multi_output(
          "p(y1,y2|x)", labeled_subset(trainData, split), config,
          "fit:multiout:labeled"));
      return out;
    }
    case BaselineKind::SSL: {
      const Dataset labeled = labeled_subset(trainData, split);
      MultiOutputNet stage1 = fit_multi_output(
          "p(y1,y2|x) stage1", labeled, config, "fit:multiout:labeled");
      // Impute the semi-labeled rows with stage-1 point predictions and
      // refit on the union.
      Dataset unioned = labeled;
      for (std::size_t i : split.y1_only) {
        Sample s = trainData.samples[i];
        const auto [h1, h2] = m_eval(config.model, stage1.params, s.x);
        (void)h1;
        s.y2 = point_value(trainData.task, h2);
        unioned.samples.push_back(std::move(s));
      }
      for (std::size_t i : split.y2_only) {
        Sample s = trainData.samples[i];
        const auto [h1, h2] = m_eval(config.model, stage1.params, s.x);
        (void)h2;
        s.y1 = point_value(trainData.task, h1);
        unioned.samples.push_back(std::move(s));
      }
      MultiOutputNet stage2 = fit_multi_output(
          "p(y1,y2|x) stage2", unioned, config, "fit:multiout:imputed");
      out.multi_components = {std::move(stage1), std::move(stage2)};
      return out;
    }
    case BaselineKind::LS: {
      std::vector<FitRow> rows1;
      for (std::size_t i : split.labeled) {
        rows1.push_back({&trainData.samples[i].x, 0.0,
                         *trainData.samples[i].y2});
      }
      for (std::size_t i : split.y2_only) {
        rows1.push_back({&trainData.samples[i].x, 0.0,
                         *trainData.samples[i].y2});
      }
      ComponentNet m1 = fit_component("p(y2|x)", trainData, rows1, false,
                                      config, "fit:p_y2|x");
      std::vector<FitRow> rows2;
      for (std::size_t i : split.labeled) {
        rows2.push_back({&trainData.samples[i].x, *trainData.samples[i].y2,
                         *trainData.samples[i].y1});
      }
      for (std::size_t i : split.y1_only) {
        const double y2_hat = point_value(
            trainData.task, component_predict(m1, trainData.samples[i].x));
        rows2.push_back({&trainData.samples[i].x, y2_hat,
                         *trainData.samples[i].y1});
      }
      ComponentNet m2 = fit_component("p(y1|x,y2)", trainData, rows2, true,
                                      config, "fit:p_y1|x,y2");
      out.components = {std::move(m1), std::move(m2)};
      return out;
    }
    case BaselineKind::DSML: {
      BaselinePredictor p = fit_dsml(trainData, config);
      p.kind = BaselineKind::DSML;
      return p;
    }
    case BaselineKind::DSML_REV: {
      BaselinePredictor p = fit_dsml(swap_labels(trainData), config);
      p.kind = BaselineKind::DSML_REV;
      return p;
    }
  }
  throw ConfigError("baseline_fit: unknown kind");
}

BaselinePrediction baseline_predict(const BaselinePredictor& predictor,
                                    const Sample& sample,
                                    const PresenceMask& presence) {
  if (presence.y1_present && presence.y2_present) {
    throw ContractError("baseline_predict: sample is fully labeled");
  }
  if ((presence.y1_present && !sample.y1) ||
      (presence.y2_present && !sample.y2)) {
    throw ContractError("baseline_predict: presence mask names missing label");
  }
  BaselinePrediction out;
  switch (predictor.kind) {
    case BaselineKind::ID: {
      if (!presence.y1_present) {
        out.y1 = component_predict(predictor.components[0], sample.x);
      }
      if (!presence.y2_present) {
        out.y2 = component_predict(predictor.components[1], sample.x);
      }
      return out;
    }
    case BaselineKind::COL:
    case BaselineKind::SSL: {
      const MultiOutputNet& net = predictor.multi_components.back();
      const auto [h1, h2] = m_eval(predictor.model, net.params, sample.x);
      if (!presence.y1_present) out.y1 = h1;
      if (!presence.y2_present) out.y2 = h2;
      return out;
    }
    case BaselineKind::LS: {
      const ComponentNet& m1 = predictor.components[0];
      const ComponentNet& m2 = predictor.components[1];
      double y2_value = 0.0;
      if (!presence.y2_present) {
        const double y2_hat = component_predict(m1, sample.x);
        out.y2 = y2_hat;
        y2_value = point_value(predictor.task, y2_hat);
      } else {
        y2_value = *sample.y2;
      }
      if (!presence.y1_present) {
        out.y1 = component_predict(m2, sample.x, y2_value);
      }
      return out;
    }
    case BaselineKind::DSML:
      return predict_dsml(predictor, sample, presence);
    case BaselineKind::DSML_REV: {
      const Sample swapped = swap_sample(sample);
      const PresenceMask mask{presence.y2_present, presence.y1_present};
      const BaselinePrediction rev = predict_dsml(predictor, swapped, mask);
      out.y1 = rev.y2;
      out.y2 = rev.y1;
      return out;
    }
  }
  throw ContractError("baseline_predict: unknown kind");
}

}  // namespace dll
