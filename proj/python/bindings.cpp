#include <pybind11/functional.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "mvts/config.hpp"
#include "mvts/error.hpp"
#include "mvts/gradcheck.hpp"
#include "mvts/harness.hpp"

namespace py = pybind11;
using namespace mvts;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

Tensor to_tensor(const Array& a) {
  Shape shape(a.shape(), a.shape() + a.ndim());
  return Tensor::from_data(std::move(shape), std::vector<double>(a.data(), a.data() + a.size()));
}

Array to_array(const Tensor& t) {
  std::vector<py::ssize_t> shape(t.shape().begin(), t.shape().end());
  Array out(shape);
  std::copy(t.data().begin(), t.data().end(), out.mutable_data());
  return out;
}

std::vector<Tensor> to_views(const std::vector<Array>& views) {
  std::vector<Tensor> out;
  for (const auto& v : views) out.push_back(to_tensor(v));
  return out;
}

py::array_t<float> windows_array(const WindowedDataset& ds) {
  py::array_t<float> out({ds.num_windows, ds.num_channels, ds.window_length});
  std::copy(ds.windows.begin(), ds.windows.end(), out.mutable_data());
  return out;
}

WindowedDataset dataset_from_arrays(py::array_t<float, py::array::c_style | py::array::forcecast> windows,
                                    std::optional<py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast>> labels,
                                    std::size_t num_classes, std::optional<std::vector<std::string>> channel_names,
                                    double sample_rate_hz) {
  if (windows.ndim() != 3) throw DimensionError("windows must be a [N, C, T] array");
  WindowedDataset ds;
  ds.num_windows = windows.shape(0);
  ds.num_channels = windows.shape(1);
  ds.window_length = windows.shape(2);
  ds.windows.assign(windows.data(), windows.data() + windows.size());
  if (labels) {
    ds.has_labels = true;
    ds.labels.assign(labels->data(), labels->data() + labels->size());
    ds.num_classes = num_classes;
  }
  if (channel_names) {
    ds.channel_names = *channel_names;
  } else {
    for (std::size_t c = 0; c < ds.num_channels; ++c) ds.channel_names.push_back("ch" + std::to_string(c));
  }
  ds.sample_rate_mhz = std::uint32_t(std::llround(sample_rate_hz * 1000.0));
  ds.validate();
  return ds;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Channel-agnostic contrastive pretraining for multichannel time series";

  auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
  py::register_exception<UsageError>(m, "UsageError", base.ptr());
  py::register_exception<DimensionError>(m, "DimensionError", base.ptr());
  py::register_exception<DataError>(m, "DataError", base.ptr());
  py::register_exception<FormatError>(m, "FormatError", base.ptr());

  py::class_<WindowedDataset>(m, "Dataset")
      .def(py::init(&dataset_from_arrays), py::arg("windows"), py::arg("labels") = py::none(),
           py::arg("num_classes") = 0, py::arg("channel_names") = py::none(), py::arg("sample_rate_hz") = 100.0)
      .def_readonly("num_windows", &WindowedDataset::num_windows)
      .def_readonly("num_channels", &WindowedDataset::num_channels)
      .def_readonly("window_length", &WindowedDataset::window_length)
      .def_readonly("num_classes", &WindowedDataset::num_classes)
      .def_readonly("has_labels", &WindowedDataset::has_labels)
      .def_readonly("channel_names", &WindowedDataset::channel_names)
      .def_property_readonly("sample_rate_hz", &WindowedDataset::sample_rate_hz)
      .def_property_readonly("windows", &windows_array)
      .def_property_readonly("labels",
                             [](const WindowedDataset& ds) {
                               py::array_t<std::uint8_t> out(std::vector<py::ssize_t>{py::ssize_t(ds.labels.size())});
                               std::copy(ds.labels.begin(), ds.labels.end(), out.mutable_data());
                               return out;
                             })
      .def("select_channels",
           [](const WindowedDataset& ds, const std::vector<std::size_t>& ch) { return select_channels(ds, ch); })
      .def("__len__", [](const WindowedDataset& ds) { return ds.num_windows; })
      .def("__eq__", [](const WindowedDataset& a, const WindowedDataset& b) { return a == b; });

  m.def("generate_synthetic", [](const std::string& json) { return generate_synthetic(parse_synth_config(json)); },
        py::arg("config_json") = "{}");
  m.def("split_dataset",
        [](const WindowedDataset& ds, std::array<double, 3> ratios, std::uint64_t seed) {
          Rng rng = make_rng(seed, 0x5B117);
          return split_dataset(ds, ratios, rng);
        },
        py::arg("dataset"), py::arg("ratios") = std::array<double, 3>{0.6, 0.2, 0.2}, py::arg("seed") = 0);
  m.def("read_cts", &read_cts);
  m.def("write_cts", &write_cts);
  m.def("standardize_window",
        [](const Array& w) {
          if (w.ndim() != 2) throw DimensionError("window must be [C, T]");
          auto out = standardize_window(std::span<const double>(w.data(), w.size()), w.shape(0));
          Array arr({w.shape(0), w.shape(1)});
          std::copy(out.begin(), out.end(), arr.mutable_data());
          return arr;
        });

  py::class_<ModelCheckpoint>(m, "Checkpoint")
      .def_readonly("config_json", &ModelCheckpoint::config_json)
      .def_readonly("seed", &ModelCheckpoint::seed)
      .def_property_readonly("parameter_names",
                             [](const ModelCheckpoint& c) {
                               std::vector<std::string> names;
                               for (const auto& p : c.parameters) names.push_back(p.name);
                               return names;
                             })
      .def("to_bytes",
           [](const ModelCheckpoint& c) {
             const auto b = encode_checkpoint(c);
             return py::bytes(reinterpret_cast<const char*>(b.data()), b.size());
           })
      .def_static("from_bytes",
                  [](const py::bytes& b) {
                    const std::string s = b;
                    return decode_checkpoint(std::span(reinterpret_cast<const std::uint8_t*>(s.data()), s.size()));
                  })
      .def("save", [](const ModelCheckpoint& c, const std::filesystem::path& p) { save_checkpoint(c, p); })
      .def_static("load", &load_checkpoint)
      .def("__eq__", [](const ModelCheckpoint& a, const ModelCheckpoint& b) { return a == b; });

  py::class_<PretrainEpochLog>(m, "PretrainEpoch")
      .def_readonly("epoch", &PretrainEpochLog::epoch)
      .def_readonly("train_loss", &PretrainEpochLog::train_loss)
      .def_readonly("val_loss", &PretrainEpochLog::val_loss)
      .def_readonly("wall_seconds", &PretrainEpochLog::wall_seconds);

  py::class_<PretrainResult>(m, "PretrainResult")
      .def_readonly("checkpoint", &PretrainResult::checkpoint)
      .def_readonly("step_losses", &PretrainResult::step_losses)
      .def_readonly("epochs", &PretrainResult::epochs)
      .def_readonly("clamped_exponents", &PretrainResult::clamped_exponents);

  m.def("pretrain",
        [](const std::string& json, const WindowedDataset& train, const WindowedDataset& val) {
          const auto cfg = parse_pretrain_config(json);
          py::gil_scoped_release release;
          return pretrain(cfg, train, val);
        },
        py::arg("config_json"), py::arg("train"), py::arg("val"));

  py::class_<FinetuneResult>(m, "FinetuneResult")
      .def_readonly("balanced_accuracy", &FinetuneResult::balanced_accuracy)
      .def_readonly("epochs_run", &FinetuneResult::epochs_run)
      .def_readonly("best_epoch", &FinetuneResult::best_epoch)
      .def_readonly("train_losses", &FinetuneResult::train_losses)
      .def_readonly("val_losses", &FinetuneResult::val_losses)
      .def_readonly("pretraining", &FinetuneResult::pretraining)
      .def_readonly("strategy", &FinetuneResult::strategy)
      .def("predict", [](const FinetuneResult& r, const WindowedDataset& ds) { return to_array(predict(r, ds)); });

  m.def("finetune",
        [](const std::string& json, const ModelCheckpoint* ckpt, const WindowedDataset& labeled,
           const WindowedDataset& val, const WindowedDataset& test) {
          const auto cfg = parse_finetune_config(json);
          py::gil_scoped_release release;
          return finetune(cfg, ckpt, labeled, val, test);
        },
        py::arg("config_json"), py::arg("checkpoint"), py::arg("labeled"), py::arg("val"), py::arg("test"));

  m.def("encoder_output_len",
        [](std::size_t t_in, const std::string& json) {
          return encoder_output_len(t_in, parse_pretrain_config(json).encoder);
        },
        py::arg("t_in"), py::arg("config_json") = "{}");

  m.def("nt_xent", [](const std::vector<Array>& views, double tau) { return nt_xent(to_views(views), tau).item(); },
        py::arg("views"), py::arg("tau") = 0.5);
  m.def("ts2vec",
        [](const std::vector<Array>& views, bool hierarchical) { return ts2vec(to_views(views), hierarchical).item(); },
        py::arg("views"), py::arg("hierarchical") = true);
  m.def("cocoa",
        [](const std::vector<Array>& views, double tau, double lambda) {
          return cocoa(to_views(views), tau, lambda).item();
        },
        py::arg("views"), py::arg("tau") = 0.5, py::arg("lambda_") = 1.0);

  m.def("balanced_accuracy",
        [](const std::vector<std::size_t>& pred, const std::vector<std::size_t>& labels, std::size_t k) {
          return balanced_accuracy(pred, labels, k);
        });

  m.def("gradcheck",
        [](std::size_t instances, double tolerance, std::uint64_t seed) {
          GradcheckOptions opts;
          opts.instances = instances;
          opts.tolerance = tolerance;
          opts.seed = seed;
          py::dict out;
          for (const auto& c : gradcheck_cases()) {
            const auto r = run_gradcheck(c, opts);
            out[py::str(r.name)] = py::make_tuple(r.passed, r.max_relative_error);
          }
          return out;
        },
        py::arg("instances") = 20, py::arg("tolerance") = 1e-4, py::arg("seed") = 0);
}
