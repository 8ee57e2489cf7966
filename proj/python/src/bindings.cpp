#include <pybind11/numpy.h>
#include <pybind11/gil_safe_call_once.h>
#include <pybind11/pybind11.h>

#include <cstring>

#include "roman/errors.hpp"
#include "roman/io.hpp"
#include "roman/routing.hpp"
#include "roman/synth.hpp"
#include "roman/version.hpp"

namespace py = pybind11;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

// Non-contiguous or non-float64 input is copied once by forcecast; the rows
// are then copied into Series, which own their storage.
std::vector<roman::Series> to_series(const Array& values) {
  if (values.ndim() != 3) {
    throw roman::Error(roman::ErrorKind::shape_mismatch,
                       "expected an N x C x L array, got " + std::to_string(values.ndim()) + " dimensions");
  }
  const auto n = static_cast<std::size_t>(values.shape(0));
  const auto c = static_cast<std::size_t>(values.shape(1));
  const auto l = static_cast<std::size_t>(values.shape(2));
  std::vector<roman::Series> batch;
  batch.reserve(n);
  const double* data = values.data();
  for (std::size_t i = 0; i < n; ++i) {
    batch.emplace_back(c, l, std::vector<double>(data + i * c * l, data + (i + 1) * c * l));
  }
  return batch;
}

Array to_array(const std::vector<roman::Series>& batch, std::size_t channels, std::size_t length) {
  Array out({batch.size(), channels, length});
  double* dst = out.mutable_data();
  for (const auto& s : batch) {
    std::memcpy(dst, s.values().data(), s.size() * sizeof(double));
    dst += s.size();
  }
  return out;
}

py::tuple transform(const Array& values, int scales, double alpha, unsigned threads) {
  auto batch = to_series(values);
  const auto channels = static_cast<std::size_t>(values.shape(1));
  const auto length = static_cast<std::size_t>(values.shape(2));
  const auto config = roman::RomanConfig::with_scales(scales, alpha);
  std::vector<roman::Series> routed;
  roman::RoutingPlan plan;
  {
    py::gil_scoped_release release;
    config.validate();
    if (batch.empty()) {
      plan = roman::apply_roman(roman::Series(channels, length), config).plan;
    } else {
      routed = roman::apply_roman_batch(batch, config, &plan, threads);
    }
  }
  return py::make_tuple(to_array(routed, plan.total_pseudochannels(), plan.base_length),
                        roman::io::plan_to_json(plan).dump());
}

py::dict generate(const std::string& family, std::uint64_t seed, std::size_t length, std::size_t n_train,
                  std::size_t n_test) {
  roman::synth::SynthTaskSpec spec;
  spec.family = roman::synth::family_from_string(family);
  spec.seed = seed;
  spec.length = length;
  spec.n_train = n_train;
  spec.n_test = n_test;
  roman::synth::SynthDataset data;
  {
    py::gil_scoped_release release;
    data = roman::synth::generate(spec);
  }
  const auto labels = [](const std::vector<int>& v) {
    py::array_t<int> a(static_cast<py::ssize_t>(v.size()));
    std::copy(v.begin(), v.end(), a.mutable_data());
    return a;
  };
  py::dict out;
  out["X_train"] = to_array(data.train.data.series, 1, length);
  out["y_train"] = labels(data.train.data.labels);
  out["X_test"] = to_array(data.test.data.series, 1, length);
  out["y_test"] = labels(data.test.data.labels);
  out["metadata"] = data.metadata.dump();
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Multiscale routing operator for time series (compiled core)";
  m.attr("__version__") = std::string(roman::kVersion);

  PYBIND11_CONSTINIT static py::gil_safe_call_once_and_store<py::object> error_type;
  error_type.call_once_and_store_result(
      [&]() { return py::exception<roman::Error>(m, "RomanError", PyExc_ValueError); });
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const roman::Error& e) {
      const py::object& type = error_type.get_stored();
      py::object instance = type(e.what());
      instance.attr("kind") = std::string(roman::to_string(e.kind()));
      PyErr_SetObject(type.ptr(), instance.ptr());
    }
  });

  m.def("transform", &transform, py::arg("values"), py::arg("scales"), py::arg("alpha") = 0.5,
        py::arg("threads") = 1u);
  m.def("generate", &generate, py::arg("family"), py::arg("seed") = 0, py::arg("length") = 512,
        py::arg("n_train") = 500, py::arg("n_test") = 250);
}
