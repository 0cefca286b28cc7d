// cmseq command-line tool. Talks to the library only through the C API.

#include "cmseq/cmseq.h"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdint>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace {

using json = nlohmann::json;

// Exit-code contract.
constexpr int kExitOk = 0;
constexpr int kExitNegative = 1;
constexpr int kExitInvalidInput = 2;
constexpr int kExitIo = 3;

struct ModelDeleter {
  void operator()(cmseq_model* m) const { cmseq_model_free(m); }
};
struct PairDeleter {
  void operator()(cmseq_pair* p) const { cmseq_pair_free(p); }
};
using ModelHandle = std::unique_ptr<cmseq_model, ModelDeleter>;
using PairHandle = std::unique_ptr<cmseq_pair, PairDeleter>;

class CommandError : public std::runtime_error {
 public:
  CommandError(int exit_code, const std::string& what) : std::runtime_error(what), exit_code_(exit_code) {}
  int exit_code() const { return exit_code_; }

 private:
  int exit_code_;
};

int exit_code_for(cmseq_status status) {
  switch (status) {
    case CMSEQ_OK: return kExitOk;
    case CMSEQ_ERR_INADMISSIBLE: return kExitNegative;
    case CMSEQ_ERR_IO: return kExitIo;
    default: return kExitInvalidInput;
  }
}

void check(cmseq_status status, const std::string& context) {
  if (status == CMSEQ_OK) return;
  throw CommandError(exit_code_for(status), context + ": " + cmseq_last_error());
}

ModelHandle load_model(const std::string& path) {
  cmseq_model* raw = nullptr;
  check(cmseq_model_load(path.c_str(), &raw), path);
  return ModelHandle(raw);
}

cmseq_model_info describe(const cmseq_model* model) {
  cmseq_model_info info{};
  check(cmseq_model_describe(model, &info), "describe");
  return info;
}

cmseq_model_kind parse_kind(const std::string& name) {
  cmseq_model_kind kind{};
  check(cmseq_model_kind_from_name(name.c_str(), &kind), "--target");
  return kind;
}

cmseq_method parse_method(const std::string& name) {
  cmseq_method method{};
  check(cmseq_method_from_name(name.c_str(), &method), "--method");
  return method;
}

const char* condition_name(cmseq_condition c) {
  switch (c) {
    case CMSEQ_CONDITION_HOLDS: return "holds";
    case CMSEQ_CONDITION_FAILS: return "fails";
    case CMSEQ_CONDITION_NOT_APPLICABLE: return "not_applicable";
  }
  return "unknown";
}

bool admits(const cmseq_structure_report& r, cmseq_model_kind kind) {
  switch (kind) {
    case CMSEQ_FORWARD_MARKOV:
    case CMSEQ_BACKWARD_MARKOV: return r.is_markov;
    case CMSEQ_RECIPROCAL: return r.is_reciprocal;
    case CMSEQ_CML_FORWARD:
    case CMSEQ_CML_BACKWARD: return r.is_cml;
    case CMSEQ_CMF_FORWARD:
    case CMSEQ_CMF_BACKWARD: return r.is_cmf;
  }
  return false;
}

json structure_json(const cmseq_model* model, double tol, cmseq_structure_report& report) {
  check(cmseq_model_classify(model, tol, &report, nullptr, 0), "classify");
  std::vector<cmseq_block_violation> violations(report.violation_count);
  check(cmseq_model_classify(model, tol, &report, violations.data(), violations.size()), "classify");

  json out;
  out["cml"] = report.is_cml != 0;
  out["cmf"] = report.is_cmf != 0;
  out["reciprocal"] = report.is_reciprocal != 0;
  out["markov"] = report.is_markov != 0;
  out["tolerance"] = report.tolerance;
  out["violations"] = json::array();
  for (const auto& v : violations) out["violations"].push_back({{"row", v.row}, {"col", v.col}, {"max_abs", v.max_abs}});

  cmseq_condition_report cond{};
  check(cmseq_model_check_conditions(model, tol, &cond), "conditions");
  if (cond.is_cm_model) {
    json c;
    c["reciprocal"] = condition_name(cond.reciprocal);
    c["markov"] = condition_name(cond.markov);
    if (cond.reciprocal_failure >= 0) c["reciprocal_failure_k"] = cond.reciprocal_failure;
    if (cond.markov_failure >= 0) c["markov_failure_k"] = cond.markov_failure;
    out["conditions"] = std::move(c);
  }
  return out;
}

struct Output {
  bool quiet = false;
  void emit(const json& doc) const {
    if (!quiet) std::cout << doc.dump(2) << '\n';
  }
};

int run_info(const std::string& in, double tol, const Output& output) {
  const ModelHandle model = load_model(in);
  const cmseq_model_info info = describe(model.get());
  cmseq_structure_report report{};
  json out;
  out["class"] = cmseq_model_kind_name(info.kind);
  out["N"] = info.horizon;
  out["dim"] = info.dim;
  out["state_size"] = (info.horizon + 1) * info.dim;
  out["structure"] = structure_json(model.get(), tol, report);
  output.emit(out);
  return kExitOk;
}

int run_classify(const std::string& in, double tol, const std::optional<std::string>& target, const Output& output) {
  const ModelHandle model = load_model(in);
  cmseq_structure_report report{};
  json out = structure_json(model.get(), tol, report);
  out["class"] = cmseq_model_kind_name(describe(model.get()).kind);
  int code = kExitOk;
  if (target) {
    const cmseq_model_kind kind = parse_kind(*target);
    const bool ok = admits(report, kind);
    out["target"] = *target;
    out["admissible"] = ok;
    if (!ok) code = kExitNegative;
  }
  output.emit(out);
  return code;
}

int run_convert(const std::string& in, const std::string& target, const std::string& method, double tol,
                const std::string& out_path, const std::optional<std::string>& noise_in,
                const std::optional<std::string>& noise_out, const Output& output) {
  const ModelHandle source = load_model(in);
  cmseq_pair* raw_pair = nullptr;
  check(cmseq_convert(source.get(), parse_kind(target), parse_method(method), tol, &raw_pair), "convert");
  const PairHandle pair(raw_pair);

  cmseq_model* raw_target = nullptr;
  check(cmseq_pair_target(pair.get(), &raw_target), "convert");
  const ModelHandle converted(raw_target);
  check(cmseq_model_save(converted.get(), out_path.c_str()), out_path);

  double residual = 0.0;
  check(cmseq_pair_precision_residual(pair.get(), &residual), "convert");

  json report;
  report["source"] = cmseq_model_kind_name(describe(source.get()).kind);
  report["target"] = target;
  report["method"] = method;
  report["out"] = out_path;
  report["precision_residual"] = residual;

  if (noise_in) {
    int horizon = 0;
    int dim = 0;
    size_t length = 0;
    check(cmseq_realization_read(noise_in->c_str(), &horizon, &dim, nullptr, 0, &length), *noise_in);
    std::vector<double> xi(length), zeta(length), path(length);
    check(cmseq_realization_read(noise_in->c_str(), &horizon, &dim, xi.data(), xi.size(), &length), *noise_in);
    const cmseq_model_info info = describe(source.get());
    if (horizon != info.horizon || dim != info.dim) {
      throw CommandError(kExitInvalidInput, *noise_in + ": realization shape does not match the model");
    }
    check(cmseq_pair_map_noise(pair.get(), xi.data(), length, zeta.data(), path.data()), "map noise");
    check(cmseq_realization_write(noise_out->c_str(), horizon, dim, zeta.data(), path.data(), length), *noise_out);
    report["noise_out"] = *noise_out;
  }
  output.emit(report);
  return kExitOk;
}

int run_sample(const std::string& in, std::uint64_t seed, std::size_t count, const std::string& out_path,
               const Output& output) {
  const ModelHandle model = load_model(in);
  check(cmseq_sample_save(model.get(), seed, count, out_path.c_str()), out_path);
  output.emit({{"out", out_path}, {"seed", seed}, {"count", count}});
  return kExitOk;
}

int run_verify(const std::string& in, const std::optional<std::string>& target,
               const std::optional<std::string>& against, const std::string& method, double tol, std::uint64_t seed,
               std::size_t count, const Output& output) {
  const ModelHandle source = load_model(in);
  cmseq_pair* raw_pair = nullptr;
  if (against) {
    const ModelHandle other = load_model(*against);
    check(cmseq_pair_create(source.get(), other.get(), &raw_pair), "verify");
  } else {
    check(cmseq_convert(source.get(), parse_kind(*target), parse_method(method), tol, &raw_pair), "convert");
  }
  const PairHandle pair(raw_pair);

  const cmseq_tolerances tolerances{tol, tol, tol};
  cmseq_verification_report report{};
  check(cmseq_verify(pair.get(), seed, count, &tolerances, &report), "verify");

  json out;
  out["passed"] = report.passed != 0;
  out["max_path_error"] = report.max_path_error;
  out["precision_error"] = report.precision_error;
  out["noise_cov_error"] = report.noise_cov_error;
  out["tolerances"] = {{"path", report.tolerances.path},
                       {"precision", report.tolerances.precision},
                       {"noise_cov", report.tolerances.noise_cov}};
  out["count"] = report.count;
  out["seed"] = seed;
  output.emit(out);
  return report.passed ? kExitOk : kExitNegative;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Build, convert, sample and verify dynamic models of Gaussian CM, reciprocal and Markov sequences"};
  app.require_subcommand(1);
  app.fallthrough();
  Output output;
  app.add_flag("--quiet,-q", output.quiet, "Suppress stdout; report through the exit code only");

  std::string in;
  std::string target;
  std::optional<std::string> target_opt;
  std::optional<std::string> against;
  std::string method = "generic";
  double tol = 1e-8;
  std::uint64_t seed = 0;
  std::size_t count = 1000;
  std::string out_path;
  std::optional<std::string> noise_in;
  std::optional<std::string> noise_out;

  auto* info = app.add_subcommand("info", "Describe a model file");
  info->add_option("model", in, "Model file")->required();
  info->add_option("--tol", tol, "Relative zero-block tolerance")->capture_default_str();

  auto* classify = app.add_subcommand("classify", "Classify the precision structure of a model's sequence");
  classify->add_option("model", in, "Model file")->required();
  classify->add_option("--tol", tol, "Relative zero-block tolerance")->capture_default_str();
  classify->add_option("--target", target_opt, "Exit 1 unless the sequence admits this model class");

  auto* convert = app.add_subcommand("convert", "Convert a model to an equivalent model of another class");
  convert->add_option("model", in, "Source model file")->required();
  convert->add_option("--target", target, "Target model class")->required();
  convert->add_option("--method", method, "generic or closed-form")->capture_default_str();
  convert->add_option("--tol", tol, "Relative zero-block tolerance")->capture_default_str();
  convert->add_option("--out", out_path, "Output model file")->required();
  auto* noise_opt = convert->add_option("--noise", noise_in, "Source noise realization to map");
  convert->add_option("--noise-out", noise_out, "Mapped realization and common sample path")->needs(noise_opt);
  noise_opt->needs("--noise-out");

  auto* sample = app.add_subcommand("sample", "Draw sample paths from a model");
  sample->add_option("model", in, "Model file")->required();
  sample->add_option("--seed", seed, "Random seed")->capture_default_str();
  sample->add_option("--count", count, "Number of paths")->capture_default_str()->check(CLI::PositiveNumber);
  sample->add_option("--out", out_path, "Output batch file")->required();

  auto* verify = app.add_subcommand("verify", "Convert and verify explicit sample equivalence");
  verify->add_option("model", in, "Source model file")->required();
  auto* verify_target = verify->add_option("--target", target_opt, "Target model class");
  auto* verify_against = verify->add_option("--against", against, "Existing target model file");
  verify_target->excludes(verify_against);
  verify->add_option("--method", method, "generic or closed-form")->capture_default_str();
  verify->add_option("--tol", tol, "Tolerance for structure and verification errors")->capture_default_str();
  verify->add_option("--seed", seed, "Random seed")->capture_default_str();
  verify->add_option("--count", count, "Number of realizations")->capture_default_str()->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitInvalidInput;
  }

  try {
    if (*info) return run_info(in, tol, output);
    if (*classify) return run_classify(in, tol, target_opt, output);
    if (*convert) return run_convert(in, target, method, tol, out_path, noise_in, noise_out, output);
    if (*sample) return run_sample(in, seed, count, out_path, output);
    if (*verify) {
      if (!target_opt && !against) throw CommandError(kExitInvalidInput, "verify needs --target or --against");
      return run_verify(in, target_opt, against, method, tol, seed, count, output);
    }
  } catch (const CommandError& e) {
    std::cerr << "cmseq: " << e.what() << '\n';
    return e.exit_code();
  }
  return kExitInvalidInput;
}
