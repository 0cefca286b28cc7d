#include "cmseq/io.hpp"

#include "cmseq/model.hpp"

#include <json.hpp>

#include <array>
#include <charconv>
#include <fstream>
#include <initializer_list>
#include <set>
#include <sstream>

namespace cmseq::io {

using json = nlohmann::json;

namespace {

[[noreturn]] void schema_error(const std::string& path, const std::string& message) {
  throw Error(ErrorCode::Parse, path + ": " + message);
}

json parse_json(std::string_view text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::Parse, std::string("invalid JSON: ") + e.what());
  }
}

const json& require(const json& doc, const std::string& key) {
  auto it = doc.find(key);
  if (it == doc.end()) schema_error(key, "missing field");
  return *it;
}

int read_int(const json& doc, const std::string& key) {
  const json& v = require(doc, key);
  if (!v.is_number_integer()) schema_error(key, "expected an integer");
  return v.get<int>();
}

double read_number(const json& v, const std::string& path) {
  if (!v.is_number()) schema_error(path, "expected a number");
  return v.get<double>();
}

Matrix read_matrix(const json& v, int dim, const std::string& path) {
  if (!v.is_array() || v.size() != static_cast<std::size_t>(dim)) {
    schema_error(path, "expected " + std::to_string(dim) + " rows");
  }
  Matrix m(dim, dim);
  for (int r = 0; r < dim; ++r) {
    const json& row = v[static_cast<std::size_t>(r)];
    const std::string row_path = path + "[" + std::to_string(r) + "]";
    if (!row.is_array() || row.size() != static_cast<std::size_t>(dim)) {
      schema_error(row_path, "expected " + std::to_string(dim) + " columns");
    }
    for (int c = 0; c < dim; ++c) {
      m(r, c) = read_number(row[static_cast<std::size_t>(c)], row_path + "[" + std::to_string(c) + "]");
    }
  }
  return m;
}

MatrixList read_matrix_list(const json& doc, const std::string& key, int dim, std::size_t expected) {
  const json& v = require(doc, key);
  if (!v.is_array()) schema_error(key, "expected an array of matrices");
  if (v.size() != expected) {
    schema_error(key, "expected " + std::to_string(expected) + " matrices, got " + std::to_string(v.size()));
  }
  MatrixList out;
  for (std::size_t i = 0; i < v.size(); ++i) out.push_back(read_matrix(v[i], dim, key + "[" + std::to_string(i) + "]"));
  return out;
}

Vector read_vector(const json& doc, const std::string& key, Eigen::Index expected) {
  const json& v = require(doc, key);
  if (!v.is_array()) schema_error(key, "expected an array of numbers");
  if (static_cast<Eigen::Index>(v.size()) != expected) {
    schema_error(key, "expected " + std::to_string(expected) + " values, got " + std::to_string(v.size()));
  }
  Vector out(expected);
  for (Eigen::Index i = 0; i < expected; ++i) {
    out[i] = read_number(v[static_cast<std::size_t>(i)], key + "[" + std::to_string(i) + "]");
  }
  return out;
}

void reject_unknown_keys(const json& doc, std::initializer_list<const char*> allowed) {
  const std::set<std::string> keys(allowed.begin(), allowed.end());
  for (const auto& [key, value] : doc.items()) {
    if (!keys.contains(key)) schema_error(key, "unknown field");
  }
}

void check_version(const json& doc) {
  const json& v = require(doc, "format_version");
  if (!v.is_string() || v.get<std::string>() != kFormatVersion) {
    schema_error("format_version", "unsupported version, expected \"" + std::string(kFormatVersion) + "\"");
  }
}

SequenceShape read_shape(const json& doc) {
  SequenceShape shape{read_int(doc, "N"), read_int(doc, "dim")};
  try {
    shape.validate();
  } catch (const Error& e) {
    throw Error(ErrorCode::Parse, std::string("N/dim: ") + e.what());
  }
  return shape;
}

// Minimal emitter: top-level fields one per line, arrays of arrays one element
// per line, numbers with 17 significant digits.
void emit_number(std::ostringstream& out, double value) {
  std::array<char, 32> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), value, std::chars_format::general, 17);
  std::string text(buf.data(), res.ptr);
  if (text.find_first_of(".e") == std::string::npos) text += ".0";
  out << text;
}

void emit_compact(std::ostringstream& out, const json& v) {
  if (v.is_array()) {
    out << '[';
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (i) out << ", ";
      emit_compact(out, v[i]);
    }
    out << ']';
  } else if (v.is_number_float()) {
    emit_number(out, v.get<double>());
  } else {
    out << v.dump();
  }
}

using Field = std::pair<std::string, json>;

std::string emit_document(const std::vector<Field>& fields) {
  std::ostringstream out;
  out << "{\n";
  for (std::size_t f = 0; f < fields.size(); ++f) {
    const auto& [key, value] = fields[f];
    out << "  " << json(key).dump() << ": ";
    if (value.is_array() && !value.empty() && value[0].is_array()) {
      out << "[\n";
      for (std::size_t i = 0; i < value.size(); ++i) {
        out << "    ";
        emit_compact(out, value[i]);
        out << (i + 1 < value.size() ? ",\n" : "\n");
      }
      out << "  ]";
    } else {
      emit_compact(out, value);
    }
    out << (f + 1 < fields.size() ? ",\n" : "\n");
  }
  out << "}\n";
  return out.str();
}

json matrix_json(const Matrix& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

json list_json(const MatrixList& list) {
  json out = json::array();
  for (const auto& m : list) out.push_back(matrix_json(m));
  return out;
}

json vector_json(const Vector& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

std::vector<Field> header(std::string_view cls, const SequenceShape& shape) {
  return {{"format_version", std::string(kFormatVersion)},
          {"class", std::string(cls)},
          {"N", shape.horizon},
          {"dim", shape.dim}};
}

}  // namespace

ModelSpec parse_model(std::string_view text) {
  const json doc = parse_json(text);
  if (!doc.is_object()) schema_error("<root>", "expected an object");
  check_version(doc);
  const json& cls = require(doc, "class");
  if (!cls.is_string()) schema_error("class", "expected a string");
  ModelKind kind;
  try {
    kind = model_kind_from_name(cls.get<std::string>());
  } catch (const Error& e) {
    schema_error("class", e.what());
  }
  const SequenceShape shape = read_shape(doc);
  const auto n = static_cast<std::size_t>(shape.horizon);
  const int dim = shape.dim;

  ModelSpec model;
  switch (kind) {
    case ModelKind::ForwardMarkov:
    case ModelKind::BackwardMarkov: {
      reject_unknown_keys(doc, {"format_version", "class", "N", "dim", "transitions", "noise_covs"});
      auto transitions = read_matrix_list(doc, "transitions", dim, n);
      auto covs = read_matrix_list(doc, "noise_covs", dim, n + 1);
      if (kind == ModelKind::ForwardMarkov) {
        model = ForwardMarkovModel{shape, std::move(transitions), std::move(covs)};
      } else {
        model = BackwardMarkovModel{shape, std::move(transitions), std::move(covs)};
      }
      break;
    }
    case ModelKind::Reciprocal: {
      reject_unknown_keys(doc, {"format_version", "class", "N", "dim", "diag_terms", "super_terms", "corner_term"});
      model = ReciprocalModel{shape, read_matrix_list(doc, "diag_terms", dim, n + 1),
                              read_matrix_list(doc, "super_terms", dim, n),
                              read_matrix(require(doc, "corner_term"), dim, "corner_term")};
      break;
    }
    default: {
      reject_unknown_keys(doc, {"format_version", "class", "N", "dim", "transitions", "couplings", "noise_covs"});
      CmModel cm;
      cm.shape = shape;
      cm.direction = cm_direction(kind);
      cm.conditioning = cm_conditioning(kind);
      cm.transitions = read_matrix_list(doc, "transitions", dim, n - 1);
      cm.couplings = read_matrix_list(doc, "couplings", dim, n);
      cm.noise_covs = read_matrix_list(doc, "noise_covs", dim, n + 1);
      model = std::move(cm);
      break;
    }
  }
  validate(model);
  return model;
}

std::string serialize_model(const ModelSpec& model) {
  std::vector<Field> fields = header(model_kind_name(kind_of(model)), shape_of(model));
  std::visit(
      [&](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, ReciprocalModel>) {
          fields.emplace_back("diag_terms", list_json(m.diag_terms));
          fields.emplace_back("super_terms", list_json(m.super_terms));
          fields.emplace_back("corner_term", matrix_json(m.corner_term));
        } else if constexpr (std::is_same_v<T, CmModel>) {
          fields.emplace_back("transitions", list_json(m.transitions));
          fields.emplace_back("couplings", list_json(m.couplings));
          fields.emplace_back("noise_covs", list_json(m.noise_covs));
        } else {
          fields.emplace_back("transitions", list_json(m.transitions));
          fields.emplace_back("noise_covs", list_json(m.noise_covs));
        }
      },
      model);
  return emit_document(fields);
}

ModelSpec load_model(const std::filesystem::path& path) { return parse_model(read_file(path)); }

void save_model(const ModelSpec& model, const std::filesystem::path& path) {
  write_file(path, serialize_model(model));
}

RealizationDocument parse_realization(std::string_view text) {
  const json doc = parse_json(text);
  if (!doc.is_object()) schema_error("<root>", "expected an object");
  check_version(doc);
  const json& cls = require(doc, "class");
  if (!cls.is_string() || cls.get<std::string>() != "realization") {
    schema_error("class", "expected \"realization\"");
  }
  reject_unknown_keys(doc, {"format_version", "class", "N", "dim", "values", "path"});
  const SequenceShape shape = read_shape(doc);
  RealizationDocument out{NoiseRealization(shape, read_vector(doc, "values", shape.size())), std::nullopt};
  if (doc.contains("path")) out.path = read_vector(doc, "path", shape.size());
  return out;
}

std::string serialize_realization(const RealizationDocument& doc) {
  std::vector<Field> fields = header("realization", doc.values.shape);
  fields.emplace_back("values", vector_json(doc.values.values));
  if (doc.path) fields.emplace_back("path", vector_json(*doc.path));
  return emit_document(fields);
}

RealizationDocument load_realization(const std::filesystem::path& path) {
  return parse_realization(read_file(path));
}

void save_realization(const RealizationDocument& doc, const std::filesystem::path& path) {
  write_file(path, serialize_realization(doc));
}

std::string serialize_batch(const SampleBatch& batch) {
  std::vector<Field> fields = header("sample_batch", batch.shape);
  fields.emplace_back("seed", batch.seed);
  fields.emplace_back("count", batch.count);
  json paths = json::array();
  for (const auto& p : batch.paths) paths.push_back(vector_json(p));
  fields.emplace_back("paths", std::move(paths));
  return emit_document(fields);
}

void save_batch(const SampleBatch& batch, const std::filesystem::path& path) {
  write_file(path, serialize_batch(batch));
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open '" + path.string() + "' for reading");
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw Error(ErrorCode::Io, "error reading '" + path.string() + "'");
  return buf.str();
}

void write_file(const std::filesystem::path& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::Io, "cannot open '" + path.string() + "' for writing");
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw Error(ErrorCode::Io, "error writing '" + path.string() + "'");
}

}  // namespace cmseq::io
