#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "recon/experiments.hpp"
#include "recon/grid.hpp"
#include "recon/io.hpp"
#include "recon/multichannel.hpp"
#include "recon/pocs_ortho.hpp"
#include "recon/samplers.hpp"
#include "recon/sinc_table.hpp"

namespace py = pybind11;
using namespace recon;

namespace {

SpectrumProfile profile_from_name(const std::string& name) {
  if (name == "flat") return SpectrumProfile::kFlat;
  if (name == "linear") return SpectrumProfile::kLinearIncreasing;
  throw std::invalid_argument("profile must be 'flat' or 'linear'");
}

DiscreteMode mode_from_name(const std::string& name) {
  if (name == "plain") return DiscreteMode::kPlain;
  if (name == "relaxed") return DiscreteMode::kRelaxed;
  if (name == "multiplierless") return DiscreteMode::kMultiplierless;
  throw std::invalid_argument("mode must be plain, relaxed or multiplierless");
}

GridSignal signal_from_values(Eigen::VectorXd values, int T, int R,
                              bool bandlimited) {
  return GridSignal(make_grid(T, R), std::move(values), bandlimited);
}

}  // namespace

PYBIND11_MODULE(_recon, m) {
  m.doc() = "POCS reconstruction of bandlimited periodic signals from "
            "generalized non-uniform samples";

  m.def("random_bandlimited",
        [](int T, int R, const std::string& profile, std::uint64_t seed,
           double dc_weight) {
          return random_bandlimited(make_grid(T, R), profile_from_name(profile),
                                    seed, dc_weight)
              .values();
        },
        py::arg("T"), py::arg("R"), py::arg("profile") = "flat",
        py::arg("seed") = 0, py::arg("dc_weight") = 0.0);

  m.def("project_bandlimited",
        [](Eigen::VectorXd values, int T, int R) {
          return project_B(signal_from_values(std::move(values), T, R, false))
              .values();
        },
        py::arg("values"), py::arg("T"), py::arg("R"));

  m.def("dirichlet_kernel",
        [](double t0, int T, int R) {
          return dirichlet_kernel(t0, make_grid(T, R)).values();
        },
        py::arg("t0"), py::arg("T"), py::arg("R"));

  m.def("inner_product",
        [](const Eigen::VectorXd& u, const Eigen::VectorXd& v, int T, int R) {
          return inner_product(signal_from_values(u, T, R, false),
                               signal_from_values(v, T, R, false));
        },
        py::arg("u"), py::arg("v"), py::arg("T"), py::arg("R"));

  m.def("find_extrema",
        [](Eigen::VectorXd values, int T, int R) {
          const ExtremaResult ex =
              find_extrema(project_B(signal_from_values(std::move(values), T, R, false)));
          return py::make_tuple(ex.times, ex.values);
        },
        py::arg("values"), py::arg("T"), py::arg("R"));

  m.def("encode_if",
        [](Eigen::VectorXd values, int T, int R, double bias, double threshold) {
          const SpikeTrain tr = encode_if(
              project_B(signal_from_values(std::move(values), T, R, false)),
              bias, threshold);
          return py::make_tuple(tr.times, tr.samples);
        },
        py::arg("values"), py::arg("T"), py::arg("R"), py::arg("bias"),
        py::arg("threshold"));

  m.def("if_gram",
        [](const std::vector<double>& partition, int T, int R, bool normalized) {
          const KernelFamily fam = if_kernels(partition, 0.0, make_grid(T, R));
          const SamplingOperator op(fam, SubspaceProjector::bandlimited(1));
          return op.gram(normalized).entries;
        },
        py::arg("partition"), py::arg("T"), py::arg("R"),
        py::arg("normalized") = true);

  m.def("reconstruct_if",
        [](Eigen::VectorXd values, int T, int R, double bias, double threshold,
           long n_iter, const std::string& mode, double lambda) {
          const GridSpec spec = make_grid(T, R);
          const GridSignal x =
              project_B(signal_from_values(std::move(values), T, R, false));
          const SpikeTrain tr = encode_if(x, bias, threshold);
          const KernelFamily fam = if_kernels(tr.times, 0.0, spec);
          const SamplingOperator op(fam, SubspaceProjector::bandlimited(1));
          DiscreteRunOptions opt;
          opt.n_iter = n_iter;
          opt.mode = mode_from_name(mode);
          opt.lambda = lambda;
          const DiscreteRunResult res =
              run_discrete(op, sample(x, fam), MultiSignal::zero(spec, 1), opt);
          return res.estimate.channel(0).values();
        },
        py::arg("values"), py::arg("T"), py::arg("R"), py::arg("bias"),
        py::arg("threshold"), py::arg("n_iter") = 200,
        py::arg("mode") = "plain", py::arg("lambda") = 1.0);

  m.def("pinv_reconstruct_if",
        [](Eigen::VectorXd values, int T, int R, double bias, double threshold) {
          const GridSpec spec = make_grid(T, R);
          const GridSignal x =
              project_B(signal_from_values(std::move(values), T, R, false));
          const SpikeTrain tr = encode_if(x, bias, threshold);
          const KernelFamily fam = if_kernels(tr.times, 0.0, spec);
          const SamplingOperator op(fam, SubspaceProjector::bandlimited(1));
          const PinvSolver pinv(op);
          return pinv.solve(sample(x, fam).normalized).channel(0).values();
        },
        py::arg("values"), py::arg("T"), py::arg("R"), py::arg("bias"),
        py::arg("threshold"));

  m.def("tight_frame",
        [](int M, int N) { return tight_frame(M, N).A; }, py::arg("M"),
        py::arg("N"));

  m.def("psi", &psi, py::arg("t"));
  m.def("f_closed", &f_closed, py::arg("t"));
  m.def("gram_entry_sinc",
        [](double t_ij, double t_ij_prev, double t_ipjp, double t_ipjp_prev,
           double t_max) {
          const LookupTable table(t_max);
          return gram_entry_f(t_ij, t_ij_prev, t_ipjp, t_ipjp_prev, table);
        },
        py::arg("t_ij"), py::arg("t_ij_prev"), py::arg("t_ipjp"),
        py::arg("t_ipjp_prev"), py::arg("t_max") = 64.0);

  m.def("run_experiment",
        [](const std::string& config_text, bool full) {
          const ExperimentResult r =
              run_experiment(KeyValueConfig::parse(config_text), full);
          return py::make_tuple(r.csv, r.report, r.exit_code);
        },
        py::arg("config_text"), py::arg("full") = false);
}
