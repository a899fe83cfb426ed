#include "gridids/serialize.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>

#include "gridids/error.hpp"

namespace gridids {

namespace {

constexpr std::array<char, 6> kForestMagic{'G', 'R', 'I', 'D', 'R', 'F'};
constexpr std::array<char, 6> kHierMagic{'G', 'R', 'I', 'D', 'H', 'M'};

class Writer {
 public:
  explicit Writer(std::ostream& out) : out_(out) {}

  template <typename T>
  void uint(T v) {
    std::array<char, sizeof(T)> b{};
    for (std::size_t i = 0; i < sizeof(T); ++i) b[i] = static_cast<char>((static_cast<std::uint64_t>(v) >> (8 * i)) & 0xff);
    out_.write(b.data(), b.size());
  }
  void u8(std::uint8_t v) { uint(v); }
  void u32(std::uint32_t v) { uint(v); }
  void u64(std::uint64_t v) { uint(v); }
  void i32(std::int32_t v) { uint(static_cast<std::uint32_t>(v)); }
  void f64(double v) { uint(std::bit_cast<std::uint64_t>(v)); }
  void magic(const std::array<char, 6>& m) { out_.write(m.data(), m.size()); }

  void check() const {
    if (!out_) throw Error(ErrorCode::Io, "write failed");
  }

 private:
  std::ostream& out_;
};

class Reader {
 public:
  explicit Reader(std::istream& in) : in_(in) {}

  template <typename T>
  T uint() {
    std::array<unsigned char, sizeof(T)> b{};
    in_.read(reinterpret_cast<char*>(b.data()), b.size());
    if (!in_) throw Error(ErrorCode::Format, "truncated model data");
    std::uint64_t v = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    return static_cast<T>(v);
  }
  std::uint8_t u8() { return uint<std::uint8_t>(); }
  std::uint32_t u32() { return uint<std::uint32_t>(); }
  std::uint64_t u64() { return uint<std::uint64_t>(); }
  std::int32_t i32() { return static_cast<std::int32_t>(uint<std::uint32_t>()); }
  double f64() { return std::bit_cast<double>(uint<std::uint64_t>()); }

  /// Element count guarded against absurd values from corrupt input.
  std::size_t count(std::uint64_t limit = std::uint64_t{1} << 32) {
    const auto n = u64();
    if (n > limit) throw Error(ErrorCode::Format, "implausible element count " + std::to_string(n));
    return static_cast<std::size_t>(n);
  }

  void expect_magic(const std::array<char, 6>& m, const char* what) {
    std::array<char, 6> got{};
    in_.read(got.data(), got.size());
    if (!in_ || got != m) throw Error(ErrorCode::Format, std::string("not a ") + what + " model");
    const auto version = u32();
    if (version != kModelFormatVersion)
      throw Error(ErrorCode::Format, "unsupported model format version " + std::to_string(version));
  }

 private:
  std::istream& in_;
};

void write_params(Writer& w, const ForestParams& p) {
  w.u64(p.n_estimators);
  w.u8(static_cast<std::uint8_t>(p.max_features));
  w.u8(static_cast<std::uint8_t>(p.criterion));
  w.u8(p.max_depth.has_value());
  w.u64(p.max_depth.value_or(0));
  w.u64(p.min_samples_split);
  w.u8(p.bootstrap);
  w.u64(p.seed);
}

ForestParams read_params(Reader& r) {
  ForestParams p;
  p.n_estimators = r.u64();
  const auto mf = r.u8();
  const auto cr = r.u8();
  if (mf > 2 || cr > 1) throw Error(ErrorCode::Format, "bad forest parameter encoding");
  p.max_features = static_cast<MaxFeatures>(mf);
  p.criterion = static_cast<Criterion>(cr);
  const bool has_depth = r.u8() != 0;
  const auto depth = r.u64();
  if (has_depth) p.max_depth = depth;
  p.min_samples_split = r.u64();
  p.bootstrap = r.u8() != 0;
  p.seed = r.u64();
  return p;
}

std::ifstream open_read(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open '" + path.string() + "'");
  return in;
}

std::ofstream open_write(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::Io, "cannot write '" + path.string() + "'");
  return out;
}

}  // namespace

void write_forest(std::ostream& out, const Forest& forest) {
  Writer w(out);
  w.magic(kForestMagic);
  w.u32(kModelFormatVersion);
  write_params(w, forest.params());
  w.u64(forest.feature_count());
  w.u64(forest.labels().size());
  for (int l : forest.labels()) w.i32(l);
  w.u64(forest.trees().size());
  for (const auto& tree : forest.trees()) {
    w.u64(tree.nodes().size());
    for (const auto& n : tree.nodes()) {
      w.u32(n.left);
      w.u32(n.right);
      w.u32(n.feature);
      w.f64(n.threshold);
      w.f64(n.impurity);
      w.u64(n.n_samples);
      w.u32(n.prediction);
      w.u32(n.counts_begin);
      w.u32(n.counts_size);
    }
    w.u64(tree.leaf_counts().size());
    for (const auto& c : tree.leaf_counts()) {
      w.u32(c.class_index);
      w.u64(c.count);
    }
  }
  w.check();
}

Forest read_forest(std::istream& in) {
  Reader r(in);
  r.expect_magic(kForestMagic, "forest");
  const auto params = read_params(r);
  const auto feature_count = r.count();
  std::vector<int> labels(r.count());
  for (auto& l : labels) l = r.i32();
  std::vector<DecisionTree> trees(r.count());
  for (auto& tree : trees) {
    std::vector<TreeNode> nodes(r.count());
    for (auto& n : nodes) {
      n.left = r.u32();
      n.right = r.u32();
      n.feature = r.u32();
      n.threshold = r.f64();
      n.impurity = r.f64();
      n.n_samples = r.u64();
      n.prediction = r.u32();
      n.counts_begin = r.u32();
      n.counts_size = r.u32();
    }
    std::vector<LeafCount> counts(r.count());
    for (auto& c : counts) {
      c.class_index = r.u32();
      c.count = r.u64();
    }
    // structural checks so a corrupt file cannot send prediction out of bounds
    for (const auto& n : nodes) {
      if (!n.is_leaf() && (n.left >= nodes.size() || n.right >= nodes.size() || n.feature >= feature_count))
        throw Error(ErrorCode::Format, "tree node references out of range");
      if (n.is_leaf() && (n.prediction >= labels.size() || std::size_t{n.counts_begin} + n.counts_size > counts.size()))
        throw Error(ErrorCode::Format, "leaf references out of range");
    }
    if (nodes.empty()) throw Error(ErrorCode::Format, "empty tree");
    tree = DecisionTree(std::move(nodes), std::move(counts));
  }
  return Forest(params, feature_count, std::move(labels), std::move(trees));
}

void write_hierarchical(std::ostream& out, const HierarchicalModel& model) {
  Writer w(out);
  w.magic(kHierMagic);
  w.u32(kModelFormatVersion);
  w.u64(model.taxonomy.natural_labels.size());
  for (int l : model.taxonomy.natural_labels) w.i32(l);
  w.u64(model.taxonomy.attack_labels.size());
  for (int l : model.taxonomy.attack_labels) w.i32(l);
  w.i32(model.taxonomy.natural_marker);
  w.i32(model.taxonomy.attack_marker);
  w.check();
  write_forest(out, model.layer1);
  write_forest(out, model.layer2);
}

HierarchicalModel read_hierarchical(std::istream& in) {
  Reader r(in);
  r.expect_magic(kHierMagic, "hierarchical");
  HierarchicalModel m;
  for (auto n = r.count(); n > 0; --n) m.taxonomy.natural_labels.insert(r.i32());
  for (auto n = r.count(); n > 0; --n) m.taxonomy.attack_labels.insert(r.i32());
  m.taxonomy.natural_marker = r.i32();
  m.taxonomy.attack_marker = r.i32();
  m.layer1 = read_forest(in);
  m.layer2 = read_forest(in);
  return m;
}

ModelKind model_kind(const std::filesystem::path& path) {
  auto in = open_read(path);
  std::array<char, 6> got{};
  in.read(got.data(), got.size());
  if (in && got == kForestMagic) return ModelKind::Forest;
  if (in && got == kHierMagic) return ModelKind::Hierarchical;
  throw Error(ErrorCode::Format, "'" + path.string() + "' is not a model file");
}

void save_forest(const std::filesystem::path& path, const Forest& forest) {
  auto out = open_write(path);
  write_forest(out, forest);
}

Forest load_forest(const std::filesystem::path& path) {
  auto in = open_read(path);
  return read_forest(in);
}

void save_hierarchical(const std::filesystem::path& path, const HierarchicalModel& model) {
  auto out = open_write(path);
  write_hierarchical(out, model);
}

HierarchicalModel load_hierarchical(const std::filesystem::path& path) {
  auto in = open_read(path);
  return read_hierarchical(in);
}

}  // namespace gridids
