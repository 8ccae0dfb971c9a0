#include "nds/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace nds::io {

namespace {

std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

const json& require(const json& j, const std::string& key, const std::string& context) {
    if (!j.is_object() || !j.contains(key))
        throw input_error("missing field '" + context + "'", context);
    return j.at(key);
}

} // namespace

json complex_to_json(cplx z) { return json::array({z.real(), z.imag()}); }

cplx complex_from_json(const json& j, const std::string& field) {
    if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
        throw input_error("field '" + field + "' must be a [re, im] pair", field);
    return cplx(j[0].get<double>(), j[1].get<double>());
}

json matrix_to_json(const Mat& m) {
    json rows = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        json row = json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(complex_to_json(m(r, c)));
        rows.push_back(std::move(row));
    }
    return rows;
}

Mat matrix_from_json(const json& j, const std::string& field) {
    if (!j.is_array() || j.empty()) throw input_error("field '" + field + "' must be a matrix", field);
    const std::size_t rows = j.size();
    const std::size_t cols = j[0].is_array() ? j[0].size() : 0;
    if (cols == 0) throw input_error("field '" + field + "' must be a matrix", field);
    Mat m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (std::size_t r = 0; r < rows; ++r) {
        if (!j[r].is_array() || j[r].size() != cols)
            throw input_error("field '" + field + "' has ragged rows", field);
        for (std::size_t c = 0; c < cols; ++c)
            m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
                complex_from_json(j[r][c], field);
    }
    return m;
}

json vector_to_json(const Vec& v) {
    json out = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(complex_to_json(v(i)));
    return out;
}

Vec vector_from_json(const json& j, const std::string& field) {
    if (!j.is_array() || j.empty()) throw input_error("field '" + field + "' must be a vector", field);
    Vec v(static_cast<Eigen::Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i)
        v(static_cast<Eigen::Index>(i)) = complex_from_json(j[i], field);
    return v;
}

json problem_to_json(const Problem& p) {
    json j;
    j["n"] = p.ref.n();
    json mu = json::array();
    for (const cplx& m : p.ref.mu()) mu.push_back(complex_to_json(m));
    j["mu"] = std::move(mu);
    json zcols = json::array();
    for (int m = 0; m < p.frame.n(); ++m) zcols.push_back(vector_to_json(p.frame.z(m)));
    j["Z"] = std::move(zcols);

    json target;
    target["window"] = p.target.window();
    json lam = json::array();
    json dd = json::array();
    for (int m = 0; m < p.target.n(); ++m) {
        json lrow = json::array();
        json drow = json::array();
        for (long k = -p.target.window(); k <= p.target.window(); ++k) {
            lrow.push_back(complex_to_json(p.target.lambda_raw(m, k)));
            drow.push_back(vector_to_json(p.target.d_raw(m, k)));
        }
        lam.push_back(std::move(lrow));
        dd.push_back(std::move(drow));
    }
    target["lambda"] = std::move(lam);
    target["d"] = std::move(dd);
    if (p.target.finite_part()) {
        const auto& fp = *p.target.finite_part();
        json jp;
        json l0 = json::array();
        json d0 = json::array();
        for (std::size_t i = 0; i < fp.lambda0.size(); ++i) {
            l0.push_back(complex_to_json(fp.lambda0[i]));
            d0.push_back(vector_to_json(fp.d0[i]));
        }
        jp["lambda"] = std::move(l0);
        jp["d"] = std::move(d0);
        target["finite_part"] = std::move(jp);
    }
    j["target"] = std::move(target);

    json solver;
    solver["solve_window"] = p.options.solve_window;
    solver["seed"] = p.options.seed;
    solver["tol_root"] = p.options.tol_root;
    solver["tol_vec"] = p.options.tol_vec;
    solver["repair_epsilon"] = p.options.repair_epsilon;
    solver["no_repair"] = p.options.no_repair;
    solver["verify_window"] = p.options.verify_window;
    j["solver"] = std::move(solver);
    return j;
}

Problem problem_from_json(const json& j) {
    const int n = require(j, "n", "n").get<int>();
    if (n < 1) throw input_error("field 'n' must be positive", "n");

    const json& jmu = require(j, "mu", "mu");
    if (!jmu.is_array() || static_cast<int>(jmu.size()) != n)
        throw input_error("field 'mu' must list n eigenvalues", "mu");
    std::vector<cplx> mu;
    for (const auto& e : jmu) mu.push_back(complex_from_json(e, "mu"));
    ReferenceSpectrum ref(std::move(mu));

    const json& jz = require(j, "Z", "Z");
    if (!jz.is_array() || static_cast<int>(jz.size()) != n)
        throw input_error("field 'Z' must list n columns", "Z");
    Mat Z(n, n);
    for (int m = 0; m < n; ++m) Z.col(m) = vector_from_json(jz[static_cast<std::size_t>(m)], "Z");
    EigenFrame frame = biorthogonal_frame(Z);

    const json& jt = require(j, "target", "target");
    const long window = require(jt, "window", "target.window").get<long>();
    const json& jlam = require(jt, "lambda", "target.lambda");
    const json& jd = require(jt, "d", "target.d");
    if (!jlam.is_array() || static_cast<int>(jlam.size()) != n)
        throw input_error("field 'target.lambda' must have n rows", "target.lambda");
    if (!jd.is_array() || static_cast<int>(jd.size()) != n)
        throw input_error("field 'target.d' must have n rows", "target.d");
    const std::size_t width = static_cast<std::size_t>(2 * window + 1);
    std::vector<std::vector<cplx>> lambda(static_cast<std::size_t>(n));
    std::vector<std::vector<Vec>> d(static_cast<std::size_t>(n));
    for (int m = 0; m < n; ++m) {
        const auto& lrow = jlam[static_cast<std::size_t>(m)];
        const auto& drow = jd[static_cast<std::size_t>(m)];
        if (!lrow.is_array() || lrow.size() != width)
            throw input_error("row of 'target.lambda' has wrong width", "target.lambda");
        if (!drow.is_array() || drow.size() != width)
            throw input_error("row of 'target.d' has wrong width", "target.d");
        for (std::size_t i = 0; i < width; ++i) {
            lambda[static_cast<std::size_t>(m)].push_back(complex_from_json(lrow[i], "target.lambda"));
            d[static_cast<std::size_t>(m)].push_back(vector_from_json(drow[i], "target.d"));
        }
    }
    std::optional<FinitePart> finite;
    if (jt.contains("finite_part") && !jt.at("finite_part").is_null()) {
        const json& jp = jt.at("finite_part");
        FinitePart fp;
        for (const auto& e : require(jp, "lambda", "target.finite_part.lambda"))
            fp.lambda0.push_back(complex_from_json(e, "target.finite_part.lambda"));
        for (const auto& e : require(jp, "d", "target.finite_part.d"))
            fp.d0.push_back(vector_from_json(e, "target.finite_part.d"));
        finite = std::move(fp);
    }
    SpectralTarget target(window, std::move(lambda), std::move(d), std::move(finite));

    PipelineOptions options;
    if (j.contains("solver")) {
        const json& js = j.at("solver");
        if (js.contains("solve_window")) options.solve_window = js.at("solve_window").get<long>();
        if (js.contains("seed")) options.seed = js.at("seed").get<std::uint64_t>();
        if (js.contains("tol_root")) options.tol_root = js.at("tol_root").get<double>();
        if (js.contains("tol_vec")) options.tol_vec = js.at("tol_vec").get<double>();
        if (js.contains("repair_epsilon"))
            options.repair_epsilon = js.at("repair_epsilon").get<double>();
        if (js.contains("no_repair")) options.no_repair = js.at("no_repair").get<bool>();
        if (js.contains("verify_window")) options.verify_window = js.at("verify_window").get<long>();
    }

    return Problem{std::move(ref), std::move(frame), std::move(target), options};
}

Problem load_problem(const std::string& path) {
    json j;
    try {
        j = json::parse(read_text_file(path));
    } catch (const json::parse_error& e) {
        throw input_error(std::string("problem file is not valid JSON: ") + e.what());
    }
    return problem_from_json(j);
}

namespace {

json rep_to_json(const MatrixFunctionRep& rep) {
    json j;
    if (rep.constant().norm() != 0.0) j["constant"] = matrix_to_json(rep.constant());
    if (rep.linear().norm() != 0.0) j["linear"] = matrix_to_json(rep.linear());
    json terms = json::array();
    for (const auto& [e, c] : rep.exponentials()) {
        json term;
        term["exponent"] = complex_to_json(e);
        term["coefficient"] = matrix_to_json(c);
        terms.push_back(std::move(term));
    }
    j["exponential"] = std::move(terms);
    return j;
}

MatrixFunctionRep rep_from_json(const json& j, int n, const std::string& field) {
    MatrixFunctionRep rep(n);
    if (!j.is_object()) throw input_error("field '" + field + "' must be an object", field);
    if (j.contains("constant")) rep.add_constant(matrix_from_json(j.at("constant"), field));
    if (j.contains("linear")) rep.add_linear(matrix_from_json(j.at("linear"), field));
    if (j.contains("exponential")) {
        for (const auto& term : j.at("exponential")) {
            rep.add_exponential(complex_from_json(require(term, "exponent", field + ".exponent"),
                                                  field + ".exponent"),
                                matrix_from_json(require(term, "coefficient", field + ".coefficient"),
                                                 field));
        }
    }
    return rep;
}

} // namespace

json realization_to_json(const SystemRealization& sys) {
    json j;
    j["n"] = sys.n();
    j["A_minus1"] = matrix_to_json(sys.A_minus1);
    j["A2"] = rep_to_json(sys.A2);
    j["A3"] = rep_to_json(sys.A3);
    j["canonical"] = sys.canonical;
    return j;
}

SystemRealization realization_from_json(const json& j) {
    const int n = require(j, "n", "n").get<int>();
    Mat a = matrix_from_json(require(j, "A_minus1", "A_minus1"), "A_minus1");
    if (a.rows() != n || a.cols() != n)
        throw input_error("field 'A_minus1' must be n x n", "A_minus1");
    MatrixFunctionRep A2 = rep_from_json(require(j, "A2", "A2"), n, "A2");
    MatrixFunctionRep A3 = rep_from_json(require(j, "A3", "A3"), n, "A3");
    return SystemRealization(std::move(a), std::move(A2), std::move(A3));
}

SystemRealization load_realization(const std::string& path) {
    json j;
    try {
        j = json::parse(read_text_file(path));
    } catch (const json::parse_error& e) {
        throw input_error(std::string("realization file is not valid JSON: ") + e.what());
    }
    return realization_from_json(j);
}

json pipeline_diagnostics_json(const PipelineResult& result) {
    json j;
    j["condition"] = result.solution.condition;
    j["linear_residual"] = result.solution.residual;
    j["spectral_equation_residual"] = result.spectral_equation_residual;
    json closeness;
    closeness["sum_lambda"] = result.closeness.sum_lambda;
    closeness["sum_vec"] = result.closeness.sum_vec;
    closeness["warn_channels"] = result.closeness.warn_channels;
    j["closeness"] = std::move(closeness);
    if (result.repair) {
        json r;
        r["delta_norm"] = result.repair->delta_norm;
        r["retries"] = result.repair->retries;
        r["window"] = result.repair->window;
        j["repair"] = std::move(r);
    } else {
        j["repair"] = nullptr;
    }
    if (result.finite_part_C) j["finite_part_C"] = matrix_to_json(*result.finite_part_C);
    return j;
}

json verification_to_json(const VerificationReport& report) {
    json j;
    j["pass"] = report.pass;
    j["tol_root"] = report.tol_root;
    j["tol_vec"] = report.tol_vec;
    j["max_sigma_min_ratio"] = report.max_sigma_min_ratio;
    j["max_vec_residual"] = report.max_vec_residual;
    json entries = json::array();
    for (const auto& e : report.entries) {
        json je;
        je["m"] = e.m;
        je["k"] = e.k;
        je["lambda"] = complex_to_json(e.lambda);
        je["sigma_min_ratio"] = e.sigma_min_ratio;
        je["vec_residual"] = e.vec_residual;
        entries.push_back(std::move(je));
    }
    j["entries"] = std::move(entries);
    return j;
}

std::string verification_to_csv(const VerificationReport& report) {
    std::ostringstream os;
    os << "re_lambda,im_lambda,sigma_min_ratio,vec_residual\n";
    for (const auto& e : report.entries)
        os << fmt_double(e.lambda.real()) << ',' << fmt_double(e.lambda.imag()) << ','
           << fmt_double(e.sigma_min_ratio) << ',' << fmt_double(e.vec_residual) << '\n';
    return os.str();
}

json spectrum_to_json(const SpectrumResult& spectrum) {
    json j;
    j["structural_zero"] = spectrum.structural_zero;
    json entries = json::array();
    for (const auto& e : spectrum.entries) {
        json je;
        je["m"] = e.m;
        je["k"] = e.k;
        je["seed"] = complex_to_json(e.seed);
        je["root"] = complex_to_json(e.report.lambda);
        je["converged"] = e.converged;
        je["collided"] = e.collided;
        je["iterations"] = e.iterations;
        je["sigma_min_ratio"] = e.report.sigma_min_ratio;
        je["left_null"] = vector_to_json(e.report.left_null);
        je["left_residual"] = e.report.left_residual;
        entries.push_back(std::move(je));
    }
    j["roots"] = std::move(entries);
    return j;
}

std::string spectrum_to_csv(const SpectrumResult& spectrum) {
    std::ostringstream os;
    os << "m,k,re_lambda,im_lambda,sigma_min_ratio,iterations,converged,collided\n";
    for (const auto& e : spectrum.entries)
        os << e.m << ',' << e.k << ',' << fmt_double(e.report.lambda.real()) << ','
           << fmt_double(e.report.lambda.imag()) << ',' << fmt_double(e.report.sigma_min_ratio)
           << ',' << e.iterations << ',' << (e.converged ? 1 : 0) << ',' << (e.collided ? 1 : 0)
           << '\n';
    return os.str();
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw input_error("cannot open '" + path + "' for writing", "path");
    out << content;
    if (!out) throw input_error("failed writing '" + path + "'", "path");
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw input_error("cannot open '" + path + "'", "path");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace nds::io
