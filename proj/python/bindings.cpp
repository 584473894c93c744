#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <span>
#include <sstream>

#include "ifsm/collage.hpp"
#include "ifsm/generators.hpp"
#include "ifsm/io.hpp"
#include "ifsm/pipeline.hpp"
#include "ifsm/qp.hpp"

namespace py = pybind11;
using namespace ifsm;

namespace {

std::vector<double> eigen_to_vector(const Eigen::VectorXd& v) {
  return {v.data(), v.data() + v.size()};
}

Eigen::VectorXd vector_to_eigen(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

std::vector<std::vector<double>> eigen_to_rows(const Eigen::MatrixXd& m) {
  std::vector<std::vector<double>> rows(m.rows());
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    rows[i].resize(m.cols());
    for (Eigen::Index j = 0; j < m.cols(); ++j) rows[i][j] = m(i, j);
  }
  return rows;
}

IfsmSystem system_from_parameters(const std::vector<AffineMap>& maps,
                                  const std::vector<double>& packed) {
  return IfsmSystem::from_parameters(maps, std::span<const double>(packed.data(), packed.size()));
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Brownian trajectories as IFSM fixed points: generators, collage "
            "inverse problem, constrained QP solver, and the end-to-end pipeline.";

  py::register_exception<GridMismatchError>(m, "GridMismatchError", PyExc_ValueError);
  py::register_exception<MisalignmentError>(m, "MisalignmentError", PyExc_ValueError);
  py::register_exception<NotContractiveError>(m, "NotContractiveError", PyExc_ArithmeticError);
  py::register_exception<OverlapError>(m, "OverlapError", PyExc_ValueError);

  py::class_<SampledPath>(m, "SampledPath")
      .def(py::init<std::vector<double>>(), py::arg("values"))
      .def_static("zeros", &SampledPath::zeros, py::arg("n"))
      .def_property_readonly("n", &SampledPath::cells)
      .def_property_readonly("values", &SampledPath::values)
      .def("t", &SampledPath::t, py::arg("j"))
      .def("__len__", &SampledPath::size)
      .def("__getitem__",
           [](const SampledPath& p, std::int64_t j) {
             if (j < 0 || j > p.cells()) throw py::index_error();
             return p[j];
           });

  m.def("inner_product", &inner_product);
  m.def("l1_norm", &l1_norm);
  m.def("l2_norm", &l2_norm);
  m.def("l2_distance", &l2_distance);
  m.def("trapezoid_inner_product", &trapezoid_inner_product);

  py::class_<WaveletMapIndex>(m, "WaveletMapIndex")
      .def_readonly("level", &WaveletMapIndex::level)
      .def_readonly("position", &WaveletMapIndex::position)
      .def_property_readonly("linear_index", &WaveletMapIndex::linear_index);

  py::class_<AffineMap>(m, "AffineMap")
      .def(py::init<double, double>(), py::arg("s"), py::arg("a"))
      .def_static("wavelet", &AffineMap::wavelet, py::arg("level"), py::arg("position"))
      .def_property_readonly("scale", &AffineMap::scale)
      .def_property_readonly("offset", &AffineMap::offset)
      .def_property_readonly("contraction_factor", &AffineMap::contraction_factor)
      .def_property_readonly("wavelet_index", &AffineMap::wavelet_index)
      .def("__call__", &AffineMap::operator())
      .def("inverse", &AffineMap::inverse)
      .def("image", [](const AffineMap& w) {
        return std::pair{w.image_lo().to_double(), w.image_hi().to_double()};
      });

  m.def("wavelet_map", &AffineMap::wavelet, py::arg("level"), py::arg("position"));
  m.def("wavelet_family", &wavelet_family, py::arg("max_level"));

  py::class_<OverlapReport>(m, "OverlapReport")
      .def_readonly("nonoverlapping", &OverlapReport::nonoverlapping)
      .def_readonly("tiling", &OverlapReport::tiling);
  m.def("analyze_overlap", &analyze_overlap);
  m.def("is_nonoverlapping", &is_nonoverlapping);
  m.def("image_intersection_length", &image_intersection_length);

  m.def("pullback", [](const SampledPath& p, const AffineMap& w) {
    Pullback pb = pullback(p, w);
    return std::pair{pb.values, pb.mask};
  });

  py::class_<GreyMap>(m, "GreyMap")
      .def(py::init([](double alpha, double beta) { return GreyMap{alpha, beta}; }),
           py::arg("alpha"), py::arg("beta"))
      .def_readonly("alpha", &GreyMap::alpha)
      .def_readonly("beta", &GreyMap::beta);

  py::class_<IfsmSystem>(m, "IfsmSystem")
      .def(py::init<std::vector<AffineMap>, std::vector<GreyMap>>(), py::arg("maps"),
           py::arg("greys"))
      .def_static("from_parameters", &system_from_parameters, py::arg("maps"), py::arg("packed"))
      .def_property_readonly("maps", &IfsmSystem::maps)
      .def_property_readonly("greys", &IfsmSystem::greys)
      .def("__len__", &IfsmSystem::size);

  m.def("apply_operator", &apply_operator);
  m.def("contractivity_factor", &contractivity_factor);

  py::class_<FixedPointResult>(m, "FixedPointResult")
      .def_readonly("path", &FixedPointResult::path)
      .def_readonly("iterations", &FixedPointResult::iterations)
      .def_readonly("converged", &FixedPointResult::converged)
      .def_readonly("last_distance", &FixedPointResult::last_distance)
      .def_readonly("distances", &FixedPointResult::distances);

  m.def(
      "fixed_point",
      [](const IfsmSystem& sys, std::int64_t n, double tol, std::int64_t max_iter) {
        return fixed_point(sys, n, tol, max_iter);
      },
      py::arg("system"), py::arg("n"), py::arg("tol") = 1e-10, py::arg("max_iter") = 200);
  m.def("collage_bound", &collage_bound);

  py::class_<CollageQp>(m, "CollageQp")
      .def_property_readonly("A", [](const CollageQp& qp) { return eigen_to_rows(qp.A); })
      .def_property_readonly("b", [](const CollageQp& qp) { return eigen_to_vector(qp.b); })
      .def_readonly("c", &CollageQp::c)
      .def_property_readonly("g", [](const CollageQp& qp) { return eigen_to_vector(qp.g); })
      .def_readonly("h", &CollageQp::h)
      .def_property_readonly("n_maps", &CollageQp::n_maps);

  m.def("assemble_collage_qp", &assemble_collage_qp);
  m.def("assemble_collage_qp_nonoverlapping", &assemble_collage_qp_nonoverlapping);
  m.def("collage_distance", &collage_distance);
  m.def("evaluate_form", [](const CollageQp& qp, const std::vector<double>& x) {
    return evaluate_form(qp, vector_to_eigen(x));
  });

  py::class_<SolveReport>(m, "SolveReport")
      .def_property_readonly("x_star",
                             [](const SolveReport& r) { return eigen_to_vector(r.x_star); })
      .def_readonly("delta2", &SolveReport::delta2)
      .def_readonly("contractivity", &SolveReport::contractivity)
      .def_readonly("iterations", &SolveReport::iterations)
      .def_readonly("converged", &SolveReport::converged)
      .def_readonly("active_constraints", &SolveReport::active_constraints);

  m.def(
      "solve_collage_qp",
      [](const CollageQp& qp, double box, bool enforce_cap, double cap, double kkt_tol,
         std::int64_t max_iter) {
        FeasibleRegion region = enforce_cap ? FeasibleRegion::for_qp_with_cap(qp, cap, box)
                                            : FeasibleRegion::for_qp(qp, box);
        SolveOptions opts;
        opts.kkt_tol = kkt_tol;
        opts.max_iter = max_iter;
        return solve(qp, region, opts);
      },
      py::arg("qp"), py::arg("box") = 5.0, py::arg("enforce_cap") = false,
      py::arg("cap") = 0.999, py::arg("kkt_tol") = 1e-8, py::arg("max_iter") = 10000);

  py::class_<GaussianStream>(m, "GaussianStream")
      .def(py::init<std::uint64_t>(), py::arg("seed"))
      .def_property_readonly_static("algorithm_tag",
                                    [](py::object) { return GaussianStream::algorithm_tag(); })
      .def("normal", &GaussianStream::next_normal)
      .def("uniform", &GaussianStream::next_uniform);

  m.def(
      "euler_bm",
      [](std::int64_t steps, std::int64_t n, std::uint64_t seed) {
        GaussianStream stream(seed);
        return euler_bm(steps, n, stream);
      },
      py::arg("steps"), py::arg("n"), py::arg("seed"));
  m.def(
      "kac_siegert_bm",
      [](std::int64_t terms, std::int64_t n, std::uint64_t seed) {
        GaussianStream stream(seed);
        return kac_siegert_bm(terms, n, stream);
      },
      py::arg("terms"), py::arg("n"), py::arg("seed"));
  m.def("kac_siegert_variance_at_one", &kac_siegert_variance_at_one);

  py::class_<MeshStatistics>(m, "MeshStatistics")
      .def_readonly("stride", &MeshStatistics::stride)
      .def_readonly("mesh", &MeshStatistics::mesh)
      .def_readonly("quadratic_variation", &MeshStatistics::quadratic_variation)
      .def_readonly("total_variation", &MeshStatistics::total_variation)
      .def_readonly("max_increment", &MeshStatistics::max_increment);
  py::class_<PathDiagnostics>(m, "PathDiagnostics")
      .def_readonly("meshes", &PathDiagnostics::meshes);
  m.def("diagnostics", &diagnostics);

  py::class_<SelfSimilarityReport>(m, "SelfSimilarityReport")
      .def_readonly("max_residual", &SelfSimilarityReport::max_residual)
      .def_readonly("per_map_residual", &SelfSimilarityReport::per_map_residual);
  m.def("self_similarity_check", &self_similarity_check);

  py::class_<PipelineSummary>(m, "PipelineSummary")
      .def_readonly("base_ifsm_distance", &PipelineSummary::base_ifsm_distance)
      .def_readonly("collage_bound", &PipelineSummary::collage_bound)
      .def_readonly("fp_iterations", &PipelineSummary::fp_iterations)
      .def_readonly("fp_converged", &PipelineSummary::fp_converged);

  py::class_<PipelineResult>(m, "PipelineResult")
      .def_readonly("base", &PipelineResult::base)
      .def_readonly("ifsm_path", &PipelineResult::ifsm_path)
      .def_readonly("system", &PipelineResult::system)
      .def_readonly("report", &PipelineResult::report)
      .def_readonly("summary", &PipelineResult::summary);

  m.def(
      "run_pipeline",
      [](std::uint64_t seed, const std::string& method, std::int64_t steps, std::int64_t terms,
         int max_level, std::int64_t n, std::int64_t refine, bool enforce_cap, double cap) {
        PipelineOptions opts;
        opts.seed = seed;
        opts.method = base_method_from_string(method);
        opts.euler_steps = steps;
        opts.ks_terms = terms;
        opts.max_level = max_level;
        opts.grid_n = n;
        opts.refine = refine;
        opts.enforce_contractivity = enforce_cap;
        opts.contractivity_cap = cap;
        return run_pipeline(opts);
      },
      py::arg("seed") = 42, py::arg("method") = "euler", py::arg("steps") = 50,
      py::arg("terms") = 25, py::arg("max_level") = 8, py::arg("n") = 1024,
      py::arg("refine") = 1, py::arg("enforce_cap") = true, py::arg("cap") = 0.999);

  m.def("write_path_csv", [](const std::string& file, const SampledPath& p) {
    write_path_csv(file, p);
  });
  m.def("read_path_csv", [](const std::string& file) { return read_path_csv(file); });
}
