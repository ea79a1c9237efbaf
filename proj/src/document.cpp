#include "lipstab/document.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

#include "lipstab/errors.hpp"

namespace lipstab {

using nlohmann::json;

namespace {

bool same(const Vec& a, const Vec& b) { return a.size() == b.size() && (a.array() == b.array()).all(); }
bool same(const Mat& a, const Mat& b) {
  return a.rows() == b.rows() && a.cols() == b.cols() && (a.array() == b.array()).all();
}

bool same(const ConvexFunction& a, const ConvexFunction& b) {
  if (a.block != b.block || a.f.index() != b.f.index()) return false;
  if (const auto* x = std::get_if<Affine>(&a.f)) {
    const auto& y = std::get<Affine>(b.f);
    return same(x->c, y.c) && x->d == y.d;
  }
  if (const auto* x = std::get_if<Quadratic>(&a.f)) {
    const auto& y = std::get<Quadratic>(b.f);
    return same(x->q, y.q) && same(x->c, y.c) && x->r == y.r;
  }
  if (const auto* x = std::get_if<MaxAffine>(&a.f)) {
    const auto& y = std::get<MaxAffine>(b.f);
    if (x->pieces.size() != y.pieces.size()) return false;
    for (std::size_t i = 0; i < x->pieces.size(); ++i) {
      if (!same(x->pieces[i].c, y.pieces[i].c) || x->pieces[i].d != y.pieces[i].d) return false;
    }
    return true;
  }
  const auto& x = std::get<ScaledNorm>(a.f);
  const auto& y = std::get<ScaledNorm>(b.f);
  return x.kappa == y.kappa && same(x.shift, y.shift) && x.r == y.r && x.norm == y.norm;
}

// Field access with path-qualified errors.
class Reader {
 public:
  Reader(const json& node, std::string path) : node_(node), path_(std::move(path)) {
    if (!node_.is_object()) throw SchemaError(path_, "expected an object");
  }

  void allow(std::initializer_list<std::string_view> keys) const {
    for (const auto& [key, value] : node_.items()) {
      bool known = false;
      for (auto k : keys) known = known || key == k;
      if (!known) throw SchemaError(child(key), "unknown field");
    }
  }

  bool has(const std::string& key) const { return node_.contains(key); }

  const json& at(const std::string& key) const {
    if (!node_.contains(key)) throw SchemaError(child(key), "missing required field");
    return node_.at(key);
  }

  std::string child(std::string_view key) const {
    return path_.empty() ? std::string(key) : path_ + "." + std::string(key);
  }

  std::string string(const std::string& key) const {
    const json& v = at(key);
    if (!v.is_string()) throw SchemaError(child(key), "expected a string");
    return v.get<std::string>();
  }

  double number(const std::string& key) const { return as_number(at(key), child(key)); }

  Vec vector(const std::string& key) const { return as_vector(at(key), child(key)); }

  static double as_number(const json& v, const std::string& path) {
    if (!v.is_number()) throw SchemaError(path, "expected a number");
    return v.get<double>();
  }

  static Vec as_vector(const json& v, const std::string& path) {
    if (!v.is_array()) throw SchemaError(path, "expected an array of numbers");
    Vec out(static_cast<Eigen::Index>(v.size()));
    for (std::size_t i = 0; i < v.size(); ++i) {
      out[static_cast<Eigen::Index>(i)] = as_number(v[i], path + "[" + std::to_string(i) + "]");
    }
    return out;
  }

  const json& array(const std::string& key) const {
    const json& v = at(key);
    if (!v.is_array()) throw SchemaError(child(key), "expected an array");
    return v;
  }

 private:
  const json& node_;
  std::string path_;
};

std::string index_path(const std::string& base, std::size_t i) { return base + "[" + std::to_string(i) + "]"; }

ConvexFunction parse_function(const json& node, const std::string& path, NormKind norm) {
  Reader r(node, path);
  const std::string block = r.string("block");
  const std::string cls = r.string("class");
  if (cls == "affine") {
    r.allow({"block", "class", "c", "d"});
    return make_affine(block, r.vector("c"), r.number("d"));
  }
  if (cls == "quadratic") {
    r.allow({"block", "class", "Q", "c", "r"});
    const json& qn = r.array("Q");
    const std::string qpath = r.child("Q");
    Mat q(static_cast<Eigen::Index>(qn.size()), static_cast<Eigen::Index>(qn.size()));
    for (std::size_t i = 0; i < qn.size(); ++i) {
      const Vec row = Reader::as_vector(qn[i], index_path(qpath, i));
      if (row.size() != q.cols()) throw SchemaError(index_path(qpath, i), "Q must be square");
      q.row(static_cast<Eigen::Index>(i)) = row.transpose();
    }
    return make_quadratic(block, std::move(q), r.vector("c"), r.number("r"));
  }
  if (cls == "max-affine") {
    r.allow({"block", "class", "pieces"});
    const json& pn = r.array("pieces");
    std::vector<Affine> pieces;
    for (std::size_t i = 0; i < pn.size(); ++i) {
      Reader pr(pn[i], index_path(r.child("pieces"), i));
      pr.allow({"c", "d"});
      pieces.push_back({pr.vector("c"), pr.number("d")});
    }
    return make_max_affine(block, std::move(pieces));
  }
  if (cls == "scaled-norm") {
    r.allow({"block", "class", "kappa", "shift", "r"});
    return make_scaled_norm(block, r.number("kappa"), r.vector("shift"), r.number("r"), norm);
  }
  throw SchemaError(r.child("class"), "unknown function class '" + cls + "'");
}

json vec_json(const Vec& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

json function_json(const ConvexFunction& fn) {
  json out{{"block", fn.block}, {"class", std::string(fn.class_name())}};
  if (const auto* f = std::get_if<Affine>(&fn.f)) {
    out["c"] = vec_json(f->c);
    out["d"] = f->d;
  } else if (const auto* f = std::get_if<Quadratic>(&fn.f)) {
    json q = json::array();
    for (Eigen::Index i = 0; i < f->q.rows(); ++i) q.push_back(vec_json(f->q.row(i).transpose()));
    out["Q"] = std::move(q);
    out["c"] = vec_json(f->c);
    out["r"] = f->r;
  } else if (const auto* f = std::get_if<MaxAffine>(&fn.f)) {
    json pieces = json::array();
    for (const auto& p : f->pieces) pieces.push_back({{"c", vec_json(p.c)}, {"d", p.d}});
    out["pieces"] = std::move(pieces);
  } else {
    const auto& s = std::get<ScaledNorm>(fn.f);
    out["kappa"] = s.kappa;
    out["shift"] = vec_json(s.shift);
    out["r"] = s.r;
  }
  return out;
}

}  // namespace

bool operator==(const SystemDocument& a, const SystemDocument& b) {
  if (a.dimension != b.dimension || a.norm != b.norm || a.truncation != b.truncation) return false;
  if (a.rows.size() != b.rows.size()) return false;
  for (std::size_t i = 0; i < a.rows.size(); ++i) {
    const auto& x = a.rows[i];
    const auto& y = b.rows[i];
    if (x.label != y.label || !same(x.a, y.a) || x.b != y.b) return false;
  }
  if (a.partition.has_value() != b.partition.has_value()) return false;
  if (a.partition) {
    if (a.partition->size() != b.partition->size()) return false;
    for (std::size_t i = 0; i < a.partition->size(); ++i) {
      if ((*a.partition)[i].label != (*b.partition)[i].label ||
          (*a.partition)[i].members != (*b.partition)[i].members) {
        return false;
      }
    }
  }
  if (a.convex.has_value() != b.convex.has_value()) return false;
  if (a.convex) {
    if (a.convex->size() != b.convex->size()) return false;
    for (std::size_t i = 0; i < a.convex->size(); ++i) {
      if (!same((*a.convex)[i], (*b.convex)[i])) return false;
    }
  }
  return true;
}

SystemDocument parse_document(std::string_view text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw SchemaError("", std::string("invalid JSON: ") + e.what());
  }
  Reader r(root, "");
  r.allow({"version", "dimension", "norm", "rows", "partition", "convex", "truncation"});
  const std::string version = r.string("version");
  if (version != kDocumentVersion) {
    throw SchemaError("version", "expected \"" + std::string(kDocumentVersion) + "\", got \"" + version + "\"");
  }

  SystemDocument doc;
  const json& dim = r.at("dimension");
  if (!dim.is_number_integer() || dim.get<long long>() < 1) {
    throw SchemaError("dimension", "expected a positive integer");
  }
  doc.dimension = dim.get<int>();
  const std::string norm = r.string("norm");
  const auto kind = parse_norm_kind(norm);
  if (!kind) throw SchemaError("norm", "expected \"euclid\", \"l1\" or \"linf\", got \"" + norm + "\"");
  doc.norm = *kind;
  if (r.has("truncation")) doc.truncation = r.string("truncation");

  if (r.has("rows")) {
    const json& rows = r.array("rows");
    for (std::size_t i = 0; i < rows.size(); ++i) {
      Reader rr(rows[i], index_path("rows", i));
      rr.allow({"label", "a", "b"});
      Row row{rr.string("label"), rr.vector("a"), rr.number("b")};
      doc.rows.push_back(std::move(row));
    }
  }
  if (r.has("partition")) {
    const json& blocks = r.array("partition");
    doc.partition.emplace();
    for (std::size_t i = 0; i < blocks.size(); ++i) {
      Reader br(blocks[i], index_path("partition", i));
      br.allow({"block", "labels"});
      Block block{br.string("block"), {}};
      const json& labels = br.array("labels");
      for (std::size_t k = 0; k < labels.size(); ++k) {
        if (!labels[k].is_string()) throw SchemaError(index_path(br.child("labels"), k), "expected a string");
        block.members.push_back(labels[k].get<std::string>());
      }
      doc.partition->push_back(std::move(block));
    }
  }
  if (r.has("convex")) {
    const json& fns = r.array("convex");
    doc.convex.emplace();
    for (std::size_t i = 0; i < fns.size(); ++i) {
      doc.convex->push_back(parse_function(fns[i], index_path("convex", i), doc.norm));
    }
    if (!doc.rows.empty()) throw SchemaError("convex", "a document holds either linear rows or convex functions");
    if (doc.partition) throw SchemaError("partition", "convex documents take one block per function");
  } else if (!r.has("rows")) {
    throw SchemaError("rows", "missing required field");
  }
  return doc;
}

SystemDocument load_document(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot read '" + path + "'");
  std::ostringstream text;
  text << in.rdbuf();
  return parse_document(text.str());
}

std::string serialize(const SystemDocument& doc) {
  json root{{"version", std::string(kDocumentVersion)},
            {"dimension", doc.dimension},
            {"norm", std::string(to_string(doc.norm))}};
  if (!doc.is_convex() || !doc.rows.empty()) {
    json rows = json::array();
    for (const auto& row : doc.rows) rows.push_back({{"label", row.label}, {"a", vec_json(row.a)}, {"b", row.b}});
    root["rows"] = std::move(rows);
  }
  if (doc.partition) {
    json blocks = json::array();
    for (const auto& b : *doc.partition) blocks.push_back({{"block", b.label}, {"labels", b.members}});
    root["partition"] = std::move(blocks);
  }
  if (doc.convex) {
    json fns = json::array();
    for (const auto& fn : *doc.convex) fns.push_back(function_json(fn));
    root["convex"] = std::move(fns);
  }
  if (doc.truncation) root["truncation"] = *doc.truncation;
  return root.dump();
}

LinearSystem to_linear_system(const SystemDocument& doc) {
  if (doc.is_convex()) throw ValidationError("document describes a convex system");
  return LinearSystem(doc.dimension, doc.rows, NormSpec{doc.norm}, doc.truncation.value_or(""));
}

BlockPartition to_partition(const SystemDocument& doc, const LinearSystem& system) {
  if (!doc.partition) return BlockPartition::maximum(system);
  return BlockPartition(*doc.partition);
}

ConvexSystem to_convex_system(const SystemDocument& doc) {
  if (!doc.is_convex()) throw ValidationError("document describes a linear system");
  ConvexSystem out{doc.dimension, NormSpec{doc.norm}, *doc.convex, doc.truncation.value_or("")};
  for (auto& fn : out.functions) {
    if (auto* f = std::get_if<ScaledNorm>(&fn.f)) f->norm = doc.norm;
  }
  return out;
}

SystemDocument to_document(const LinearSystem& system, std::optional<BlockPartition> partition) {
  SystemDocument doc;
  doc.dimension = system.dimension();
  doc.norm = system.norm().kind;
  doc.rows = system.rows();
  if (partition) doc.partition = partition->blocks();
  if (!system.truncation_note().empty()) doc.truncation = system.truncation_note();
  return doc;
}

SystemDocument to_document(const ConvexSystem& system) {
  SystemDocument doc;
  doc.dimension = system.dimension;
  doc.norm = system.norm.kind;
  doc.convex = system.functions;
  if (!system.truncation_note.empty()) doc.truncation = system.truncation_note;
  return doc;
}

ParsedSystem to_model(const SystemDocument& doc) {
  ParsedSystem out;
  if (doc.is_convex()) {
    out.convex = to_convex_system(doc);
    validate(*out.convex).raise_if_failed();
    std::vector<Block> blocks;
    for (const auto& fn : out.convex->functions) blocks.push_back({fn.block, {fn.block}});
    out.partition = BlockPartition(std::move(blocks));
    return out;
  }
  out.linear = to_linear_system(doc);
  out.partition = to_partition(doc, *out.linear);
  validate(*out.linear, out.partition).raise_if_failed();
  return out;
}

ParsedSystem parse_system(const std::string& path) { return to_model(load_document(path)); }

}  // namespace lipstab
