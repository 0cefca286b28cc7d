#include "cmseq/cmseq.h"

#include "cmseq/equivalence.hpp"
#include "cmseq/io.hpp"
#include "cmseq/model.hpp"
#include "cmseq/sampling.hpp"
#include "cmseq/structure.hpp"

#include <cstring>
#include <new>
#include <optional>
#include <string>

struct cmseq_model {
  cmseq::ModelSpec spec;
};

struct cmseq_pair {
  cmseq::EquivalencePair pair;
};

namespace {

thread_local std::string g_last_error;

cmseq_status to_status(cmseq::ErrorCode code) {
  using cmseq::ErrorCode;
  switch (code) {
    case ErrorCode::InvalidArgument: return CMSEQ_ERR_INVALID_ARGUMENT;
    case ErrorCode::DimensionMismatch: return CMSEQ_ERR_DIMENSION_MISMATCH;
    case ErrorCode::NotPositiveDefinite: return CMSEQ_ERR_NOT_POSITIVE_DEFINITE;
    case ErrorCode::NotWellPosed: return CMSEQ_ERR_NOT_WELL_POSED;
    case ErrorCode::Inadmissible: return CMSEQ_ERR_INADMISSIBLE;
    case ErrorCode::Singular: return CMSEQ_ERR_SINGULAR;
    case ErrorCode::Parse: return CMSEQ_ERR_PARSE;
    case ErrorCode::Io: return CMSEQ_ERR_IO;
  }
  return CMSEQ_ERR_INTERNAL;
}

cmseq_status fail(cmseq_status status, std::string message) {
  g_last_error = std::move(message);
  return status;
}

// Runs fn, translating exceptions into status codes.
template <typename Fn>
cmseq_status guarded(Fn&& fn) {
  try {
    g_last_error.clear();
    return fn();
  } catch (const cmseq::Error& e) {
    return fail(to_status(e.code()), e.what());
  } catch (const std::bad_alloc&) {
    return fail(CMSEQ_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(CMSEQ_ERR_INTERNAL, e.what());
  }
}

#define CMSEQ_REQUIRE(cond, what) \
  if (!(cond)) return fail(CMSEQ_ERR_INVALID_ARGUMENT, what)

void copy_dense(const cmseq::Matrix& m, double* out) {
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) *out++ = m(r, c);
  }
}

cmseq::NoiseRealization realization_from(const cmseq::SequenceShape& shape, const double* values, size_t length) {
  if (static_cast<Eigen::Index>(length) != shape.size()) {
    throw cmseq::Error(cmseq::ErrorCode::DimensionMismatch,
                       "realization length " + std::to_string(length) + " does not match " +
                           std::to_string(shape.size()));
  }
  return cmseq::NoiseRealization(shape, Eigen::Map<const cmseq::Vector>(values, shape.size()));
}

cmseq::ModelKind to_kind(cmseq_model_kind kind) {
  if (kind < CMSEQ_FORWARD_MARKOV || kind > CMSEQ_CMF_BACKWARD) {
    throw cmseq::Error(cmseq::ErrorCode::InvalidArgument, "unknown model kind");
  }
  return static_cast<cmseq::ModelKind>(kind);
}

cmseq_condition to_condition(cmseq::ConditionOutcome outcome) {
  switch (outcome) {
    case cmseq::ConditionOutcome::Holds: return CMSEQ_CONDITION_HOLDS;
    case cmseq::ConditionOutcome::Fails: return CMSEQ_CONDITION_FAILS;
    case cmseq::ConditionOutcome::NotApplicable: return CMSEQ_CONDITION_NOT_APPLICABLE;
  }
  return CMSEQ_CONDITION_NOT_APPLICABLE;
}

}  // namespace

extern "C" {

const char* cmseq_version(void) { return "1.0.0"; }

const char* cmseq_last_error(void) { return g_last_error.c_str(); }

const char* cmseq_status_name(cmseq_status status) {
  switch (status) {
    case CMSEQ_OK: return "ok";
    case CMSEQ_ERR_INVALID_ARGUMENT: return "invalid argument";
    case CMSEQ_ERR_DIMENSION_MISMATCH: return "dimension mismatch";
    case CMSEQ_ERR_NOT_POSITIVE_DEFINITE: return "not positive definite";
    case CMSEQ_ERR_NOT_WELL_POSED: return "not well-posed";
    case CMSEQ_ERR_INADMISSIBLE: return "inadmissible target";
    case CMSEQ_ERR_SINGULAR: return "numerically singular";
    case CMSEQ_ERR_PARSE: return "parse error";
    case CMSEQ_ERR_IO: return "i/o error";
    case CMSEQ_ERR_BUFFER_TOO_SMALL: return "buffer too small";
    case CMSEQ_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

const char* cmseq_model_kind_name(cmseq_model_kind kind) {
  if (kind < CMSEQ_FORWARD_MARKOV || kind > CMSEQ_CMF_BACKWARD) return "unknown";
  // Names are static string literals.
  return cmseq::model_kind_name(static_cast<cmseq::ModelKind>(kind)).data();
}

cmseq_status cmseq_model_kind_from_name(const char* name, cmseq_model_kind* out) {
  CMSEQ_REQUIRE(name && out, "null argument");
  return guarded([&] {
    *out = static_cast<cmseq_model_kind>(cmseq::model_kind_from_name(name));
    return CMSEQ_OK;
  });
}

cmseq_status cmseq_method_from_name(const char* name, cmseq_method* out) {
  CMSEQ_REQUIRE(name && out, "null argument");
  return guarded([&] {
    *out = cmseq::conversion_method_from_name(name) == cmseq::ConversionMethod::Generic ? CMSEQ_METHOD_GENERIC
                                                                                        : CMSEQ_METHOD_CLOSED_FORM;
    return CMSEQ_OK;
  });
}

cmseq_status cmseq_model_parse(const char* text, cmseq_model** out) {
  CMSEQ_REQUIRE(text && out, "null argument");
  return guarded([&] {
    *out = new cmseq_model{cmseq::io::parse_model(text)};
    return CMSEQ_OK;
  });
}

cmseq_status cmseq_model_load(const char* path, cmseq_model** out) {
  CMSEQ_REQUIRE(path && out, "null argument");
  return guarded([&] {
    *out = new cmseq_model{cmseq::io::load_model(path)};
    return CMSEQ_OK;
  });
}

cmseq_status cmseq_model_save(const cmseq_model* model, const char* path) {
  CMSEQ_REQUIRE(model && path, "null argument");
  return guarded([&] {
    cmseq::io::save_model(model->spec, path);
    return CMSEQ_OK;
  });
}

cmseq_status cmseq_model_serialize(const cmseq_model* model, char** out) {
  CMSEQ_REQUIRE(model && out, "null argument");
  return guarded([&] {
    const std::string text = cmseq::io::serialize_model(model->spec);
    char* buf = new char[text.size() + 1];
    std::memcpy(buf, text.c_str(), text.size() + 1);
    *out = buf;
    return CMSEQ_OK;
  });
}

void cmseq_string_free(char* text) { delete[] text; }

void cmseq_model_free(cmseq_model* model) { delete model; }

cmseq_status cmseq_model_describe(const cmseq_model* model, cmseq_model_info* out) {
  CMSEQ_REQUIRE(model && out, "null argument");
  const auto& shape = cmseq::shape_of(model->spec);
  out->kind = static_cast<cmseq_model_kind>(cmseq::kind_of(model->spec));
  out->horizon = shape.horizon;
  out->dim = shape.dim;
  return CMSEQ_OK;
}

cmseq_status cmseq_model_matrix(const cmseq_model* model, cmseq_matrix_role role, double* out, size_t capacity) {
  CMSEQ_REQUIRE(model && out, "null argument");
  return guarded([&] {
    const auto size = static_cast<size_t>(cmseq::shape_of(model->spec).size());
    if (capacity < size * size) return fail(CMSEQ_ERR_BUFFER_TOO_SMALL, "matrix buffer too small");
    std::optional<cmseq::BlockMatrix> m;
    switch (role) {
      case CMSEQ_SYSTEM_MATRIX: m = cmseq::assemble_system_matrix(model->spec); break;
      case CMSEQ_NOISE_COVARIANCE: m = cmseq::assemble_noise_covariance(model->spec); break;
      case CMSEQ_INFORMATION_MATRIX: m = cmseq::information_matrix(model->spec); break;
      case CMSEQ_COVARIANCE: m = cmseq::covariance(model->spec); break;
      default: return fail(CMSEQ_ERR_INVALID_ARGUMENT, "unknown matrix role");
    }
    copy_dense(m->dense(), out);
    return CMSEQ_OK;
  });
}

cmseq_status cmseq_model_solve_path(const cmseq_model* model, const double* xi, size_t length, double* x_out) {
  CMSEQ_REQUIRE(model && xi && x_out, "null argument");
  return guarded([&] {
    const auto x = cmseq::solve_path(model->spec, realization_from(cmseq::shape_of(model->spec), xi, length));
    std::memcpy(x_out, x.values.data(), length * sizeof(double));
    return CMSEQ_OK;
  });
}

cmseq_status cmseq_model_classify(const cmseq_model* model, double tol, cmseq_structure_report* out,
                                  cmseq_block_violation* violations, size_t capacity) {
  CMSEQ_REQUIRE(model && out, "null argument");
  return guarded([&] {
    const auto report = cmseq::classify(cmseq::information_matrix(model->spec), tol);
    out->is_cml = report.is_cml;
    out->is_cmf = report.is_cmf;
    out->is_reciprocal = report.is_reciprocal;
    out->is_markov = report.is_markov;
    out->tolerance = report.tolerance;
    out->violation_count = report.violations.size();
    if (violations != nullptr) {
      for (size_t i = 0; i < report.violations.size() && i < capacity; ++i) {
        violations[i] = {report.violations[i].row, report.violations[i].col, report.violations[i].max_abs};
      }
    }
    return CMSEQ_OK;
  });
}

cmseq_status cmseq_model_check_conditions(const cmseq_model* model, double tol, cmseq_condition_report* out) {
  CMSEQ_REQUIRE(model && out, "null argument");
  return guarded([&] {
    *out = {0, CMSEQ_CONDITION_NOT_APPLICABLE, CMSEQ_CONDITION_NOT_APPLICABLE, -1, -1};
    const auto* cm = std::get_if<cmseq::CmModel>(&model->spec);
    if (cm == nullptr) return CMSEQ_OK;
    cmseq::validate(model->spec);
    const auto recip = cmseq::cm_reciprocal_condition(*cm, tol);
    const auto markov = cmseq::cm_markov_condition(*cm, tol);
    out->is_cm_model = 1;
    out->reciprocal = to_condition(recip.outcome);
    out->markov = to_condition(markov.outcome);
    if (!recip.failing_indices.empty()) out->reciprocal_failure = recip.failing_indices.front();
    if (!markov.failing_indices.empty()) out->markov_failure = markov.failing_indices.front();
    return CMSEQ_OK;
  });
}

cmseq_status cmseq_convert(const cmseq_model* source, cmseq_model_kind target, cmseq_method method, double tol,
                           cmseq_pair** out) {
  CMSEQ_REQUIRE(source && out, "null argument");
  return guarded([&] {
    const auto m = method == CMSEQ_METHOD_CLOSED_FORM ? cmseq::ConversionMethod::ClosedForm
                                                      : cmseq::ConversionMethod::Generic;
    *out = new cmseq_pair{cmseq::convert(source->spec, to_kind(target), m, tol)};
    return CMSEQ_OK;
  });
}

cmseq_status cmseq_pair_create(const cmseq_model* source, const cmseq_model* target, cmseq_pair** out) {
  CMSEQ_REQUIRE(source && target && out, "null argument");
  return guarded([&] {
    *out = new cmseq_pair{cmseq::EquivalencePair(source->spec, target->spec)};
    return CMSEQ_OK;
  });
}

void cmseq_pair_free(cmseq_pair* pair) { delete pair; }

cmseq_status cmseq_pair_target(const cmseq_pair* pair, cmseq_model** out) {
  CMSEQ_REQUIRE(pair && out, "null argument");
  return guarded([&] {
    *out = new cmseq_model{pair->pair.target()};
    return CMSEQ_OK;
  });
}

cmseq_status cmseq_pair_precision_residual(const cmseq_pair* pair, double* out) {
  CMSEQ_REQUIRE(pair && out, "null argument");
  return guarded([&] {
    *out = pair->pair.precision_residual();
    return CMSEQ_OK;
  });
}

cmseq_status cmseq_pair_map_noise(const cmseq_pair* pair, const double* xi, size_t length, double* zeta_out,
                                  double* path_out) {
  CMSEQ_REQUIRE(pair && xi && zeta_out, "null argument");
  return guarded([&] {
    const auto& shape = cmseq::shape_of(pair->pair.source());
    const auto source_noise = realization_from(shape, xi, length);
    const auto zeta = cmseq::map_noise(pair->pair, source_noise);
    std::memcpy(zeta_out, zeta.values.data(), length * sizeof(double));
    if (path_out != nullptr) {
      const auto x = cmseq::solve_path(pair->pair.target(), zeta);
      std::memcpy(path_out, x.values.data(), length * sizeof(double));
    }
    return CMSEQ_OK;
  });
}

cmseq_status cmseq_sample(const cmseq_model* model, uint64_t seed, size_t count, double* paths_out,
                          size_t capacity) {
  CMSEQ_REQUIRE(model && paths_out, "null argument");
  return guarded([&] {
    const auto size = static_cast<size_t>(cmseq::shape_of(model->spec).size());
    if (capacity < size * count) return fail(CMSEQ_ERR_BUFFER_TOO_SMALL, "path buffer too small");
    const auto batch = cmseq::sample(model->spec, seed, count, {.workers = 0});
    for (size_t i = 0; i < count; ++i) std::memcpy(paths_out + i * size, batch.paths[i].data(), size * sizeof(double));
    return CMSEQ_OK;
  });
}

cmseq_status cmseq_sample_save(const cmseq_model* model, uint64_t seed, size_t count, const char* path) {
  CMSEQ_REQUIRE(model && path, "null argument");
  return guarded([&] {
    cmseq::io::save_batch(cmseq::sample(model->spec, seed, count, {.workers = 0}), path);
    return CMSEQ_OK;
  });
}

cmseq_status cmseq_verify(const cmseq_pair* pair, uint64_t seed, size_t count, const cmseq_tolerances* tolerances,
                          cmseq_verification_report* out) {
  CMSEQ_REQUIRE(pair && out, "null argument");
  CMSEQ_REQUIRE(count >= 1, "verification needs at least one realization");
  return guarded([&] {
    cmseq::VerificationTolerances tol;
    if (tolerances != nullptr) tol = {tolerances->path, tolerances->precision, tolerances->noise_cov};
    const auto report = cmseq::verify_equivalence(pair->pair, seed, count, tol);
    *out = {report.max_path_error,
            report.precision_error,
            report.noise_cov_error,
            report.passed ? 1 : 0,
            {tol.path, tol.precision, tol.noise_cov},
            report.count};
    return CMSEQ_OK;
  });
}

cmseq_status cmseq_realization_read(const char* path, int* horizon, int* dim, double* values, size_t capacity,
                                    size_t* length) {
  CMSEQ_REQUIRE(path && length, "null argument");
  return guarded([&] {
    const auto doc = cmseq::io::load_realization(path);
    *length = static_cast<size_t>(doc.values.values.size());
    if (horizon) *horizon = doc.values.shape.horizon;
    if (dim) *dim = doc.values.shape.dim;
    if (values == nullptr) return CMSEQ_OK;
    if (capacity < *length) return fail(CMSEQ_ERR_BUFFER_TOO_SMALL, "realization buffer too small");
    std::memcpy(values, doc.values.values.data(), *length * sizeof(double));
    return CMSEQ_OK;
  });
}

cmseq_status cmseq_realization_write(const char* path, int horizon, int dim, const double* values,
                                     const double* path_values, size_t length) {
  CMSEQ_REQUIRE(path && values, "null argument");
  return guarded([&] {
    const cmseq::SequenceShape shape{horizon, dim};
    shape.validate();
    cmseq::io::RealizationDocument doc{realization_from(shape, values, length), std::nullopt};
    if (path_values != nullptr) doc.path = realization_from(shape, path_values, length).values;
    cmseq::io::save_realization(doc, path);
    return CMSEQ_OK;
  });
}

}  // extern "C"
