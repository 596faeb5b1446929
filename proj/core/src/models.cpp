// Copyright 2026 The stackkd Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "stackkd/models.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>

namespace stackkd {

using nn::Var;

namespace {

Var apply_bn(nn::BatchNorm2d& bn, const Var& x) { return bn.train(x); }
Var apply_bn(const nn::BatchNorm2d& bn, const Var& x) { return bn(x); }

}  // namespace

std::string to_string(TeacherArch arch) { return arch == TeacherArch::conv2 ? "conv2" : "resnet18"; }

TeacherArch parse_teacher_arch(std::string_view name) {
  if (name == "conv2") return TeacherArch::conv2;
  if (name == "resnet18") return TeacherArch::resnet18;
  throw Error("unknown teacher architecture: " + std::string(name));
}

int TeacherConfig::effective_width() const {
  if (width > 0) return width;
  return arch == TeacherArch::conv2 ? 32 : 64;
}

void TeacherConfig::validate() const {
  if (num_classes < 2) throw Error("teacher needs at least 2 classes");
  if (input_size < 8 || input_size % 4 != 0) throw Error("teacher input size must be a multiple of 4, >= 8");
  if (width < 0 || hidden < 1) throw Error("invalid teacher width");
}

void to_json(nlohmann::ordered_json& j, const TeacherConfig& c) {
  j = {{"arch", to_string(c.arch)}, {"num_classes", c.num_classes}, {"input_size", c.input_size},
       {"width", c.width},          {"hidden", c.hidden}};
}

void from_json(const nlohmann::ordered_json& j, TeacherConfig& c) {
  if (j.contains("arch")) c.arch = parse_teacher_arch(j.at("arch").get<std::string>());
  c.num_classes = j.value("num_classes", c.num_classes);
  c.input_size = j.value("input_size", c.input_size);
  c.width = j.value("width", c.width);
  c.hidden = j.value("hidden", c.hidden);
}

void StudentConfig::validate() const {
  if (num_classes < 2) throw Error("student needs at least one grapheme class plus blank");
  if (n_seq < 1) throw Error("n_seq must be >= 1");
  for (int c : channels)
    if (c < 1) throw Error("student channels must be positive");
  if (recurrent_hidden < 1) throw Error("recurrent_hidden must be positive");
  // Four 2x height poolings then a 2-tall valid convolution must leave height 1.
  if (input_height / 16 != 2) throw Error("student input height must be in [32, 47]");
  if (input_width / 4 - 1 < n_seq) throw Error("input too narrow: width " + std::to_string(input_width) +
                                               " cannot produce " + std::to_string(n_seq) + " steps");
}

void to_json(nlohmann::ordered_json& j, const StudentConfig& c) {
  j = {{"num_classes", c.num_classes},
       {"n_seq", c.n_seq},
       {"input_height", c.input_height},
       {"input_width", c.input_width},
       {"channels", c.channels},
       {"recurrent_hidden", c.recurrent_hidden},
       {"batch_norm", c.batch_norm}};
}

void from_json(const nlohmann::ordered_json& j, StudentConfig& c) {
  c.num_classes = j.value("num_classes", c.num_classes);
  c.n_seq = j.value("n_seq", c.n_seq);
  c.input_height = j.value("input_height", c.input_height);
  c.input_width = j.value("input_width", c.input_width);
  if (j.contains("channels")) c.channels = j.at("channels").get<std::array<int, 5>>();
  c.recurrent_hidden = j.value("recurrent_hidden", c.recurrent_hidden);
  c.batch_norm = j.value("batch_norm", c.batch_norm);
}

LogitSequence::LogitSequence(Matrix scores) : scores_(std::move(scores)) {
  if (scores_.rows() < 1 || scores_.cols() < 1) throw Error("empty logit sequence");
  if (!scores_.allFinite()) throw Error("logit sequence contains non-finite values");
}

// --- teacher -----------------------------------------------------------------

struct TeacherModel::Impl {
  virtual ~Impl() = default;
  virtual Var train(const Var& x) = 0;
  virtual Var infer(const Var& x) const = 0;
  virtual void collect(nn::ParameterSet& set) = 0;
};

namespace {

class Conv2Net final : public TeacherModel::Impl {
 public:
  Conv2Net(const TeacherConfig& c, std::mt19937_64& rng) {
    const int w = c.effective_width();
    conv1_ = nn::Conv2d(1, w, 3, 1, 1, true, rng);
    conv2_ = nn::Conv2d(w, 2 * w, 3, 1, 1, true, rng);
    const int s = c.input_size / 4;
    fc1_ = nn::Linear(2 * w * s * s, c.hidden, rng);
    fc2_ = nn::Linear(c.hidden, c.num_classes, rng);
  }
  Var train(const Var& x) override { return run(x); }
  Var infer(const Var& x) const override { return run(x); }
  void collect(nn::ParameterSet& set) override {
    conv1_.collect(set, "conv1");
    conv2_.collect(set, "conv2");
    fc1_.collect(set, "fc1");
    fc2_.collect(set, "fc2");
  }

 private:
  Var run(const Var& x) const {
    Var h = nn::max_pool2d(nn::relu(conv1_(x)), 2, 2, 2, 2);
    h = nn::max_pool2d(nn::relu(conv2_(h)), 2, 2, 2, 2);
    return fc2_(nn::relu(fc1_(nn::flatten(h))));
  }
  nn::Conv2d conv1_, conv2_;
  nn::Linear fc1_, fc2_;
};

struct BasicBlock {
  nn::Conv2d conv1, conv2, proj;
  nn::BatchNorm2d bn1, bn2, proj_bn;
  bool has_proj = false;

  BasicBlock(int in, int out, int stride, std::mt19937_64& rng)
      : conv1(in, out, 3, stride, 1, false, rng), conv2(out, out, 3, 1, 1, false, rng), bn1(out), bn2(out) {
    if (stride != 1 || in != out) {
      has_proj = true;
      proj = nn::Conv2d(in, out, 1, stride, 0, false, rng);
      proj_bn = nn::BatchNorm2d(out);
    }
  }

  template <class Self>
  static Var run(Self& b, const Var& x) {
    Var h = nn::relu(apply_bn(b.bn1, b.conv1(x)));
    h = apply_bn(b.bn2, b.conv2(h));
    Var shortcut = b.has_proj ? apply_bn(b.proj_bn, b.proj(x)) : x;
    return nn::relu(nn::add(h, shortcut));
  }

  void collect(nn::ParameterSet& set, const std::string& prefix) {
    conv1.collect(set, prefix + ".conv1");
    bn1.collect(set, prefix + ".bn1");
    conv2.collect(set, prefix + ".conv2");
    bn2.collect(set, prefix + ".bn2");
    if (has_proj) {
      proj.collect(set, prefix + ".proj");
      proj_bn.collect(set, prefix + ".proj_bn");
    }
  }
};

// 18-layer residual network: 3x3 stem, four stages of two basic blocks,
// global average pooling, linear classifier. The stem keeps full resolution
// since glyph crops are small.
class ResNet18 final : public TeacherModel::Impl {
 public:
  ResNet18(const TeacherConfig& c, std::mt19937_64& rng) {
    const int w = c.effective_width();
    stem_ = nn::Conv2d(1, w, 3, 1, 1, false, rng);
    stem_bn_ = nn::BatchNorm2d(w);
    int in = w;
    for (int stage = 0; stage < 4; ++stage) {
      const int out = w << stage;
      for (int k = 0; k < 2; ++k) {
        blocks_.emplace_back(in, out, (stage > 0 && k == 0) ? 2 : 1, rng);
        in = out;
      }
    }
    fc_ = nn::Linear(in, c.num_classes, rng);
  }
  Var train(const Var& x) override { return run(*this, x); }
  Var infer(const Var& x) const override { return run(*this, x); }
  void collect(nn::ParameterSet& set) override {
    stem_.collect(set, "stem");
    stem_bn_.collect(set, "stem_bn");
    for (std::size_t i = 0; i < blocks_.size(); ++i)
      blocks_[i].collect(set, "layer" + std::to_string(i / 2 + 1) + "." + std::to_string(i % 2));
    fc_.collect(set, "fc");
  }

 private:
  template <class Self>
  static Var run(Self& self, const Var& x) {
    Var h = nn::relu(apply_bn(self.stem_bn_, self.stem_(x)));
    for (auto& block : self.blocks_) h = BasicBlock::run(block, h);
    return self.fc_(nn::global_avg_pool(h));
  }
  nn::Conv2d stem_;
  nn::BatchNorm2d stem_bn_;
  std::vector<BasicBlock> blocks_;
  nn::Linear fc_;
};

void check_image_batch(const Var& x, int height, int width, const char* who) {
  const auto& s = x.shape();
  if (s.size() != 4 || s[1] != 1 || s[2] != height || (width > 0 && s[3] != width))
    throw Error(std::string(who) + ": expected input [N,1," + std::to_string(height) + "," +
                (width > 0 ? std::to_string(width) : std::string("W")) + "], got " + x.value().shape_string());
}

}  // namespace

TeacherModel::TeacherModel(const TeacherConfig& config, std::uint64_t seed) : config_(config) {
  config_.validate();
  std::mt19937_64 rng(mix_seed(seed, 0x7eac4e7ULL));
  if (config_.arch == TeacherArch::conv2)
    impl_ = std::make_unique<Conv2Net>(config_, rng);
  else
    impl_ = std::make_unique<ResNet18>(config_, rng);
}

TeacherModel::~TeacherModel() = default;
TeacherModel::TeacherModel(TeacherModel&&) noexcept = default;
TeacherModel& TeacherModel::operator=(TeacherModel&&) noexcept = default;

Var TeacherModel::forward_train(const Var& images) {
  check_image_batch(images, config_.input_size, config_.input_size, "teacher");
  return impl_->train(images);
}

Var TeacherModel::forward(const Var& images) const {
  check_image_batch(images, config_.input_size, config_.input_size, "teacher");
  return impl_->infer(images);
}

nn::ParameterSet TeacherModel::parameters() {
  nn::ParameterSet set;
  impl_->collect(set);
  return set;
}

std::size_t TeacherModel::parameter_count() { return parameters().parameter_count(); }

// --- student -----------------------------------------------------------------

struct StudentModel::Impl {
  std::array<nn::Conv2d, 5> convs;
  std::array<nn::BatchNorm2d, 5> bns;
  bool use_bn = true;
  int n_seq = 31;
  nn::BiLstm rnn;
  nn::Linear head;

  template <class Self>
  static Var block(Self& s, int i, const Var& x) {
    Var h = s.convs[i](x);
    if (s.use_bn) h = apply_bn(s.bns[i], h);
    return nn::relu(h);
  }

  template <class Self>
  static Var run(Self& s, const Var& x) {
    Var h = nn::max_pool2d(block(s, 0, x), 2, 2, 2, 2);
    h = nn::max_pool2d(block(s, 1, h), 2, 2, 2, 2);
    h = nn::max_pool2d(block(s, 2, h), 2, 1, 2, 1);
    h = nn::max_pool2d(block(s, 3, h), 2, 1, 2, 1);
    h = block(s, 4, h);
    if (h.shape()[2] != 1) throw Error("student backbone did not reduce height to 1");
    if (h.shape()[3] < s.n_seq)
      throw Error("input too narrow: " + std::to_string(h.shape()[3]) + " feature columns for n_seq " +
                  std::to_string(s.n_seq));
    h = nn::adaptive_avg_pool_width(h, s.n_seq);
    Var seq = s.rnn(nn::columns_to_sequence(h));  // [T, N, 2H]
    const int T = seq.shape()[0], n = seq.shape()[1], f = seq.shape()[2];
    Var out = s.head(nn::reshape(seq, {T * n, f}));
    return nn::reshape(out, {T, n, out.shape()[1]});
  }
};

StudentModel::StudentModel(const StudentConfig& config, std::uint64_t seed)
    : config_(config), impl_(std::make_unique<Impl>()) {
  config_.validate();
  std::mt19937_64 rng(mix_seed(seed, 0x57d3e27ULL));
  auto& m = *impl_;
  m.use_bn = config_.batch_norm;
  m.n_seq = config_.n_seq;
  int in = 1;
  for (int i = 0; i < 5; ++i) {
    const int out = config_.channels[static_cast<std::size_t>(i)];
    if (i < 4)
      m.convs[i] = nn::Conv2d(in, out, 3, 1, 1, !m.use_bn, rng);
    else
      m.convs[i] = nn::Conv2d(in, out, 2, 1, 0, !m.use_bn, rng);
    if (m.use_bn) m.bns[i] = nn::BatchNorm2d(out);
    in = out;
  }
  m.rnn = nn::BiLstm(in, config_.recurrent_hidden, rng);
  m.head = nn::Linear(2 * config_.recurrent_hidden, config_.num_classes, rng);
}

StudentModel::~StudentModel() = default;
StudentModel::StudentModel(StudentModel&&) noexcept = default;
StudentModel& StudentModel::operator=(StudentModel&&) noexcept = default;

Var StudentModel::forward_train(const Var& images) {
  check_image_batch(images, config_.input_height, 0, "student");
  return Impl::run(*impl_, images);
}

Var StudentModel::forward(const Var& images) const {
  check_image_batch(images, config_.input_height, 0, "student");
  return Impl::run(static_cast<const Impl&>(*impl_), images);
}

nn::ParameterSet StudentModel::parameters() {
  nn::ParameterSet set;
  auto& m = *impl_;
  for (int i = 0; i < 5; ++i) {
    m.convs[i].collect(set, "conv" + std::to_string(i + 1));
    if (m.use_bn) m.bns[i].collect(set, "bn" + std::to_string(i + 1));
  }
  m.rnn.collect(set, "rnn");
  m.head.collect(set, "head");
  return set;
}

std::size_t StudentModel::parameter_count() { return parameters().parameter_count(); }

// --- single-sample helpers ---------------------------------------------------

nn::Tensor images_to_tensor(std::span<const GrayImage* const> images) {
  if (images.empty()) throw Error("empty image batch");
  const int h = images[0]->height(), w = images[0]->width();
  nn::Tensor t({static_cast<int>(images.size()), 1, h, w});
  const std::size_t plane = static_cast<std::size_t>(h) * w;
  for (std::size_t i = 0; i < images.size(); ++i) {
    if (images[i]->height() != h || images[i]->width() != w) throw Error("image batch with mixed sizes");
    std::copy(images[i]->pixels().begin(), images[i]->pixels().end(), t.data() + i * plane);
  }
  return t;
}

nn::Tensor image_to_tensor(const GrayImage& image) {
  const GrayImage* one[] = {&image};
  return images_to_tensor(one);
}

std::vector<double> teacher_forward(const TeacherModel& teacher, const GrayImage& image) {
  const int s = teacher.config().input_size;
  if (image.height() != s || image.width() != s)
    throw Error("teacher input must be " + std::to_string(s) + "x" + std::to_string(s) + ", got " +
                std::to_string(image.height()) + "x" + std::to_string(image.width()));
  nn::NoGradGuard guard;
  Var out = teacher.forward(Var(image_to_tensor(image)));
  return {out.value().values().begin(), out.value().values().end()};
}

LogitSequence student_forward(const StudentModel& student, const GrayImage& image) {
  const auto& c = student.config();
  if (image.height() != c.input_height)
    throw Error("student input height must be " + std::to_string(c.input_height) + ", got " +
                std::to_string(image.height()));
  if (image.width() / 4 - 1 < c.n_seq)
    throw Error("input too narrow: width " + std::to_string(image.width()) + " cannot produce " +
                std::to_string(c.n_seq) + " steps");
  nn::NoGradGuard guard;
  Var out = student.forward(Var(image_to_tensor(image)));
  return std::move(split_batch_logits(out.value()).front());
}

std::vector<LogitSequence> split_batch_logits(const nn::Tensor& logits) {
  if (logits.rank() != 3) throw Error("expected [T, N, K] logits");
  const int T = logits.dim(0), n = logits.dim(1), k = logits.dim(2);
  std::vector<LogitSequence> out;
  out.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    Matrix m(T, k);
    for (int t = 0; t < T; ++t)
      for (int c = 0; c < k; ++c) m(t, c) = logits[(static_cast<std::size_t>(t) * n + i) * k + c];
    out.emplace_back(std::move(m));
  }
  return out;
}

// --- checkpoints -------------------------------------------------------------

namespace {

static_assert(std::endian::native == std::endian::little, "checkpoint IO assumes a little-endian host");

constexpr char kMagic[8] = {'S', 'T', 'K', 'D', 'C', 'K', 'P', 'T'};

template <class T>
void put(std::ostream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <class T>
T get(std::istream& in, const std::filesystem::path& path) {
  T v{};
  if (!in.read(reinterpret_cast<char*>(&v), sizeof v)) throw Error("truncated checkpoint " + path.string());
  return v;
}

}  // namespace

void write_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out.write(kMagic, sizeof kMagic);
  put<std::uint32_t>(out, kCheckpointVersion);
  const std::string meta = ckpt.meta.dump();
  put<std::uint64_t>(out, meta.size());
  out.write(meta.data(), static_cast<std::streamsize>(meta.size()));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(ckpt.tensors.size()));
  for (const auto& [name, t] : ckpt.tensors) {
    put<std::uint32_t>(out, static_cast<std::uint32_t>(name.size()));
    out.write(name.data(), static_cast<std::streamsize>(name.size()));
    put<std::uint32_t>(out, static_cast<std::uint32_t>(t.rank()));
    for (int d : t.shape()) put<std::int32_t>(out, d);
    out.write(reinterpret_cast<const char*>(t.data()), static_cast<std::streamsize>(t.size() * sizeof(double)));
  }
  if (!out) throw Error("failed writing " + path.string());
}

Checkpoint read_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open checkpoint " + path.string());
  char magic[8];
  if (!in.read(magic, sizeof magic) || std::memcmp(magic, kMagic, sizeof magic) != 0)
    throw Error("not a checkpoint: " + path.string());
  const auto version = get<std::uint32_t>(in, path);
  if (version != kCheckpointVersion)
    throw Error("unsupported checkpoint version " + std::to_string(version) + " in " + path.string());
  Checkpoint ckpt;
  const auto meta_len = get<std::uint64_t>(in, path);
  std::string meta(meta_len, '\0');
  if (!in.read(meta.data(), static_cast<std::streamsize>(meta_len))) throw Error("truncated checkpoint " + path.string());
  ckpt.meta = nlohmann::ordered_json::parse(meta);
  const auto count = get<std::uint32_t>(in, path);
  for (std::uint32_t i = 0; i < count; ++i) {
    std::string name(get<std::uint32_t>(in, path), '\0');
    if (!in.read(name.data(), static_cast<std::streamsize>(name.size())))
      throw Error("truncated checkpoint " + path.string());
    const auto rank = get<std::uint32_t>(in, path);
    std::vector<int> shape(rank);
    for (auto& d : shape) d = get<std::int32_t>(in, path);
    nn::Tensor t(shape);
    if (!in.read(reinterpret_cast<char*>(t.data()), static_cast<std::streamsize>(t.size() * sizeof(double))))
      throw Error("truncated checkpoint " + path.string());
    ckpt.tensors.emplace_back(std::move(name), std::move(t));
  }
  return ckpt;
}

Checkpoint capture_parameters(nn::ParameterSet params, nlohmann::ordered_json meta) {
  Checkpoint ckpt;
  ckpt.meta = std::move(meta);
  for (const auto& [name, v] : params.params) ckpt.tensors.emplace_back(name, v.value());
  for (const auto& [name, t] : params.buffers) ckpt.tensors.emplace_back(name, *t);
  return ckpt;
}

void restore_parameters(const Checkpoint& ckpt, nn::ParameterSet params) {
  std::map<std::string, const nn::Tensor*> by_name;
  for (const auto& [name, t] : ckpt.tensors) by_name[name] = &t;
  auto fetch = [&](const std::string& name, const std::vector<int>& shape) -> const nn::Tensor& {
    auto it = by_name.find(name);
    if (it == by_name.end()) throw Error("checkpoint is missing tensor " + name);
    if (it->second->shape() != shape)
      throw Error("checkpoint tensor " + name + " has shape " + it->second->shape_string());
    return *it->second;
  };
  for (auto& [name, v] : params.params) v.mutable_value() = fetch(name, v.shape());
  for (auto& [name, t] : params.buffers) *t = fetch(name, t->shape());
  if (by_name.size() != params.params.size() + params.buffers.size())
    throw Error("checkpoint holds tensors the model does not define");
}

void save_teacher(const std::filesystem::path& path, TeacherModel& model, const GraphemeInventory& inventory,
                  nlohmann::ordered_json extra) {
  nlohmann::ordered_json meta;
  meta["kind"] = "teacher";
  meta["config"] = model.config();
  meta["inventory"] = inventory.to_tsv();
  meta["inventory_tag"] = inventory.source_tag();
  meta["extra"] = std::move(extra);
  write_checkpoint(path, capture_parameters(model.parameters(), std::move(meta)));
}

LoadedTeacher load_teacher(const std::filesystem::path& path) {
  Checkpoint ckpt = read_checkpoint(path);
  if (ckpt.meta.value("kind", "") != "teacher") throw Error(path.string() + " is not a teacher checkpoint");
  auto config = ckpt.meta.at("config").get<TeacherConfig>();
  LoadedTeacher out{TeacherModel(config, 0),
                    GraphemeInventory::parse_tsv(ckpt.meta.at("inventory").get<std::string>(),
                                                 ckpt.meta.value("inventory_tag", "")),
                    ckpt.meta};
  if (out.inventory.size() != static_cast<std::size_t>(config.num_classes))
    throw Error("teacher checkpoint inventory does not match its class count");
  restore_parameters(ckpt, out.model.parameters());
  return out;
}

void save_student(const std::filesystem::path& path, StudentModel& model, const GraphemeInventory& inventory,
                  nlohmann::ordered_json extra) {
  nlohmann::ordered_json meta;
  meta["kind"] = "student";
  meta["config"] = model.config();
  meta["inventory"] = inventory.to_tsv();
  meta["inventory_tag"] = inventory.source_tag();
  meta["extra"] = std::move(extra);
  write_checkpoint(path, capture_parameters(model.parameters(), std::move(meta)));
}

LoadedStudent load_student(const std::filesystem::path& path) {
  Checkpoint ckpt = read_checkpoint(path);
  if (ckpt.meta.value("kind", "") != "student") throw Error(path.string() + " is not a student checkpoint");
  auto config = ckpt.meta.at("config").get<StudentConfig>();
  LoadedStudent out{StudentModel(config, 0),
                    GraphemeInventory::parse_tsv(ckpt.meta.at("inventory").get<std::string>(),
                                                 ckpt.meta.value("inventory_tag", "")),
                    ckpt.meta};
  if (out.inventory.size() + 1 != static_cast<std::size_t>(config.num_classes))
    throw Error("student checkpoint inventory does not match its class count");
  restore_parameters(ckpt, out.model.parameters());
  return out;
}

}  // namespace stackkd
