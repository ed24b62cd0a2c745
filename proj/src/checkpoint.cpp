#include <array>
#include <fstream>

#include "binary_io.hpp"
#include "cssfn/error.hpp"
#include "cssfn/train.hpp"

namespace cssfn {

namespace {
constexpr std::array<char, 4> kMagic{'C', 'S', 'C', 'K'};
constexpr std::uint32_t kVersion = 1;

void write_tensor(std::ostream& os, const NamedTensor& t) {
  io::write_string(os, t.name);
  const auto& s = t.tensor.shape();
  io::write_pod<std::uint32_t>(os, 4);
  for (const std::size_t d : {s.n, s.c, s.h, s.w}) io::write_pod<std::uint32_t>(os, static_cast<std::uint32_t>(d));
  io::write_pod<std::uint64_t>(os, t.tensor.size());
  io::write_doubles(os, t.tensor.data().data(), t.tensor.size());
}

NamedTensor read_tensor(std::istream& is) {
  NamedTensor t;
  t.name = io::read_string(is, "tensor name");
  const auto rank = io::read_pod<std::uint32_t>(is, "tensor rank");
  if (rank != 4) throw IoError("tensor " + t.name + " has rank " + std::to_string(rank) + ", expected 4");
  Shape s;
  s.n = io::read_pod<std::uint32_t>(is, "tensor shape");
  s.c = io::read_pod<std::uint32_t>(is, "tensor shape");
  s.h = io::read_pod<std::uint32_t>(is, "tensor shape");
  s.w = io::read_pod<std::uint32_t>(is, "tensor shape");
  const auto count = io::read_pod<std::uint64_t>(is, "tensor length");
  if (count != s.size()) throw IoError("tensor " + t.name + " payload length disagrees with its shape");
  std::vector<double> values(count);
  io::read_doubles(is, values.data(), values.size(), "tensor " + t.name);
  t.tensor = Tensor(s, std::move(values));
  return t;
}

void write_vector(std::ostream& os, const std::vector<double>& v) {
  io::write_pod<std::uint64_t>(os, v.size());
  io::write_doubles(os, v.data(), v.size());
}

std::vector<double> read_vector(std::istream& is, const std::string& what) {
  const auto n = io::read_pod<std::uint64_t>(is, what + " length");
  std::vector<double> v(n);
  io::read_doubles(is, v.data(), n, what);
  return v;
}

}  // namespace

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path) {
  const auto tmp = std::filesystem::path(path.string() + ".tmp");
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw IoError("cannot write checkpoint " + tmp.string());
    os.write(kMagic.data(), kMagic.size());
    io::write_pod(os, kVersion);
    io::write_string(os, ckpt.config_text);
    io::write_pod<std::uint64_t>(os, ckpt.iteration);

    io::write_pod<std::uint32_t>(os, static_cast<std::uint32_t>(ckpt.tensors.size()));
    for (const auto& t : ckpt.tensors) write_tensor(os, t);

    io::write_pod(os, ckpt.adam.beta1);
    io::write_pod(os, ckpt.adam.beta2);
    io::write_pod(os, ckpt.adam.epsilon);
    io::write_pod<std::uint64_t>(os, ckpt.adam.step);
    io::write_pod<std::uint32_t>(os, static_cast<std::uint32_t>(ckpt.adam.first_moment.size()));
    for (std::size_t i = 0; i < ckpt.adam.first_moment.size(); ++i) {
      write_vector(os, ckpt.adam.first_moment[i]);
      write_vector(os, ckpt.adam.second_moment[i]);
    }

    io::write_string(os, ckpt.rng_state);
    write_vector(os, ckpt.loss_history);
    if (!os) throw IoError("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open checkpoint " + path.string());
  std::array<char, 4> magic{};
  is.read(magic.data(), magic.size());
  if (is.gcount() != 4 || magic != kMagic) throw IoError(path.string() + ": bad magic, not a CSCK checkpoint");
  const auto version = io::read_pod<std::uint32_t>(is, "checkpoint version");
  if (version != kVersion) throw IoError(path.string() + ": unsupported checkpoint version " + std::to_string(version));

  Checkpoint c;
  c.config_text = io::read_string(is, "config echo");
  c.iteration = io::read_pod<std::uint64_t>(is, "iteration");
  const auto tensors = io::read_pod<std::uint32_t>(is, "tensor count");
  c.tensors.reserve(tensors);
  for (std::uint32_t i = 0; i < tensors; ++i) c.tensors.push_back(read_tensor(is));

  c.adam.beta1 = io::read_pod<double>(is, "adam beta1");
  c.adam.beta2 = io::read_pod<double>(is, "adam beta2");
  c.adam.epsilon = io::read_pod<double>(is, "adam epsilon");
  c.adam.step = io::read_pod<std::uint64_t>(is, "adam step");
  const auto moments = io::read_pod<std::uint32_t>(is, "adam moment count");
  for (std::uint32_t i = 0; i < moments; ++i) {
    c.adam.first_moment.push_back(read_vector(is, "adam first moment"));
    c.adam.second_moment.push_back(read_vector(is, "adam second moment"));
  }

  c.rng_state = io::read_string(is, "rng state");
  c.loss_history = read_vector(is, "loss history");
  return c;
}

void load_parameters(Network& net, const Checkpoint& ckpt) {
  const auto names = net.parameter_names();
  auto params = net.parameters();
  if (ckpt.tensors.size() != params.size()) {
    throw IoError("checkpoint holds " + std::to_string(ckpt.tensors.size()) + " tensors, network needs " +
                  std::to_string(params.size()));
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    const auto& src = ckpt.tensors[i];
    if (src.name != names[i] || src.tensor.shape() != params[i]->shape()) {
      throw IoError("checkpoint tensor " + src.name + " " + src.tensor.shape().str() + " does not match " + names[i] +
                    " " + params[i]->shape().str());
    }
    std::copy(src.tensor.data().begin(), src.tensor.data().end(), params[i]->data().begin());
  }
}

}  // namespace cssfn
