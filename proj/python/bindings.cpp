#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "cssfn/config.hpp"
#include "cssfn/degrade.hpp"
#include "cssfn/error.hpp"
#include "cssfn/metrics.hpp"
#include "cssfn/network.hpp"
#include "cssfn/ops.hpp"

namespace py = pybind11;
using namespace cssfn;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

Tensor to_tensor(const Array& a) {
  Shape s;
  switch (a.ndim()) {
    case 2:
      s = {1, 1, static_cast<std::size_t>(a.shape(0)), static_cast<std::size_t>(a.shape(1))};
      break;
    case 3:
      s = {1, static_cast<std::size_t>(a.shape(0)), static_cast<std::size_t>(a.shape(1)),
           static_cast<std::size_t>(a.shape(2))};
      break;
    case 4:
      s = {static_cast<std::size_t>(a.shape(0)), static_cast<std::size_t>(a.shape(1)),
           static_cast<std::size_t>(a.shape(2)), static_cast<std::size_t>(a.shape(3))};
      break;
    default:
      throw ConfigError("expected a 2D, 3D or 4D array");
  }
  return Tensor(s, std::vector<double>(a.data(), a.data() + a.size()));
}

Array to_array(const Tensor& t) {
  const auto& s = t.shape();
  Array out({s.n, s.c, s.h, s.w});
  std::copy(t.data().begin(), t.data().end(), out.mutable_data());
  return out;
}

Array to_plane(const Tensor& t) {
  const auto& s = t.shape();
  Array out({s.h, s.w});
  std::copy(t.data().begin(), t.data().end(), out.mutable_data());
  return out;
}

std::span<const double> view(const Array& a) { return {a.data(), static_cast<std::size_t>(a.size())}; }

}  // namespace

PYBIND11_MODULE(_cssfn, m) {
  m.doc() = "Channel splitting and serial fusion network for MR super-resolution";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<IoError>(m, "IoError", PyExc_OSError);

  py::class_<NetworkConfig>(m, "NetworkConfig")
      .def(py::init<>())
      .def_readwrite("c", &NetworkConfig::channels)
      .def_readwrite("n", &NetworkConfig::blocks)
      .def_readwrite("m", &NetworkConfig::units)
      .def_readwrite("q", &NetworkConfig::splits)
      .def_readwrite("c_o", &NetworkConfig::fusion_width)
      .def_readwrite("r", &NetworkConfig::scale)
      .def_readwrite("ic", &NetworkConfig::io_channels)
      .def_readwrite("seed", &NetworkConfig::seed)
      .def_property(
          "gff", [](const NetworkConfig& c) { return to_string(c.gff); },
          [](NetworkConfig& c, const std::string& v) { c.gff = parse_global_fusion(v); })
      .def_property(
          "bif", [](const NetworkConfig& c) { return to_string(c.bif); },
          [](NetworkConfig& c, const std::string& v) { c.bif = parse_branch_fusion(v); })
      .def("validate", &NetworkConfig::validate);

  m.def("compute_depth", &compute_depth, py::arg("config"));
  m.def(
      "count_params",
      [](const NetworkConfig& c) {
        const auto p = count_params(c);
        return py::make_tuple(p.weights, p.biases);
      },
      py::arg("config"), "(weights, biases)");
  m.def(
      "measured_depth", [](const NetworkConfig& c) { return describe_network(c).longest_path(); },
      py::arg("config"));

  py::class_<Network>(m, "Network")
      .def(py::init<const NetworkConfig&>(), py::arg("config"))
      .def("forward", [](Network& net, const Array& x) {
        Tensor out = net.forward(to_tensor(x));
        net.clear_cache();
        return to_array(out);
      })
      .def("parameter_names", &Network::parameter_names)
      .def("param_count", [](const Network& net) { return net.param_count().total(); })
      .def("zero_parameters", &Network::zero_parameters);

  m.def(
      "bicubic_upscale", [](const Array& x, std::size_t r) { return to_array(bicubic_resize(to_tensor(x), Scale::up(r))); },
      py::arg("x"), py::arg("r"));
  m.def(
      "bicubic_degrade", [](const Array& x, std::size_t r) { return to_plane(bicubic_degrade(to_tensor(x), r)); },
      py::arg("slice"), py::arg("r"));
  m.def(
      "kspace_truncate", [](const Array& x, std::size_t r) { return to_plane(kspace_truncate(to_tensor(x), r)); },
      py::arg("slice"), py::arg("r"));
  m.def(
      "spectral_upsample", [](const Array& x, std::size_t r) { return to_plane(spectral_upsample(to_tensor(x), r)); },
      py::arg("slice"), py::arg("r"));
  m.def(
      "pixel_shuffle", [](const Array& x, std::size_t r) { return to_array(pixel_shuffle(to_tensor(x), r)); },
      py::arg("x"), py::arg("r"));

  m.def(
      "psnr", [](const Array& a, const Array& b, double peak) { return psnr(view(a), view(b), peak); }, py::arg("a"),
      py::arg("b"), py::arg("peak") = 1.0);
  m.def(
      "ssim",
      [](const Array& a, const Array& b) {
        if (a.ndim() != 2) throw ConfigError("ssim expects 2D slices");
        return ssim(view(a), view(b), static_cast<std::size_t>(a.shape(0)), static_cast<std::size_t>(a.shape(1)));
      },
      py::arg("a"), py::arg("b"));

  m.def(
      "lr_schedule",
      [](std::size_t iteration, double base_lr, std::size_t halving_period) {
        TrainConfig c;
        c.base_lr = base_lr;
        c.halving_period = halving_period;
        return lr_schedule(iteration, c);
      },
      py::arg("iteration"), py::arg("base_lr") = 1e-4, py::arg("halving_period") = 200000);

  m.def(
      "synth_phantom",
      [](std::size_t slices, std::size_t height, std::size_t width, std::uint64_t seed, std::size_t max_frequency) {
        PhantomParams p;
        p.slices = slices;
        p.height = height;
        p.width = width;
        p.max_frequency = max_frequency;
        Rng rng(seed);
        const Volume v = synth_phantom(p, rng);
        Array out({v.slices, v.height, v.width});
        std::copy(v.data.begin(), v.data.end(), out.mutable_data());
        return out;
      },
      py::arg("slices"), py::arg("height"), py::arg("width"), py::arg("seed") = 0, py::arg("max_frequency") = 0);
}
