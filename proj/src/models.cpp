#include "skinrelax/models.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <set>

namespace skin {

namespace {

std::string lower(std::string s)
{
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

void check_nonneg(double v, const char* name)
{
    if (!std::isfinite(v) || v < 0.0)
        fail_config("InvalidParameter", std::string("ModelSpec: ") + name + " must be finite and >= 0");
}

} // namespace

const char* to_string(ModelKind k)
{
    switch (k) {
    case ModelKind::HN: return "HN";
    case ModelKind::SSH: return "SSH";
    case ModelKind::NNN: return "NNN";
    }
    return "?";
}

const char* to_string(Statistics s)
{
    return s == Statistics::Fermion ? "fermion" : "boson";
}

const char* to_string(EdgeLoss e)
{
    return e == EdgeLoss::Uniform ? "uniform" : "literal";
}

EdgeLoss parse_edge_loss(const std::string& s)
{
    const auto v = lower(s);
    if (v == "uniform")
        return EdgeLoss::Uniform;
    if (v == "literal")
        return EdgeLoss::Literal;
    fail_config("InvalidParameter", "unknown edge_loss '" + s + "'");
}

ModelKind parse_model_kind(const std::string& s)
{
    const auto v = lower(s);
    if (v == "hn")
        return ModelKind::HN;
    if (v == "ssh")
        return ModelKind::SSH;
    if (v == "nnn")
        return ModelKind::NNN;
    fail_config("InvalidParameter", "unknown model kind '" + s + "'");
}

Statistics parse_statistics(const std::string& s)
{
    const auto v = lower(s);
    if (v == "fermion" || v == "f" || v == "fermions")
        return Statistics::Fermion;
    if (v == "boson" || v == "b" || v == "bosons")
        return Statistics::Boson;
    fail_config("InvalidParameter", "unknown statistics '" + s + "'");
}

void to_json(nlohmann::json& j, const ModelSpec& s)
{
    j = nlohmann::json{{"kind", to_string(s.kind)},   {"statistics", to_string(s.statistics)},
                       {"L", s.L},                    {"w", s.w},
                       {"kappa", s.kappa},            {"lambda_loss", s.lambda_loss},
                       {"Gamma", s.Gamma},            {"u", s.u},
                       {"gamma_ssh", s.gamma_ssh},    {"T_nnn", s.T_nnn},
                       {"phi", s.phi},                {"edge_loss", to_string(s.edge_loss)}};
}

void from_json(const nlohmann::json& j, ModelSpec& s)
{
    static const std::set<std::string> known = {"kind", "statistics", "L", "w", "kappa", "lambda_loss",
                                                "Gamma", "u", "gamma_ssh", "T_nnn", "phi", "edge_loss"};
    if (!j.is_object())
        fail_config("InvalidConfig", "ModelSpec JSON must be an object");
    for (const auto& item : j.items())
        if (!known.count(item.key()))
            fail_config("UnknownField", "ModelSpec JSON has unknown field '" + item.key() + "'");
    try {
        ModelSpec out;
        if (j.contains("kind"))
            out.kind = parse_model_kind(j.at("kind").get<std::string>());
        if (j.contains("statistics"))
            out.statistics = parse_statistics(j.at("statistics").get<std::string>());
        if (j.contains("L"))
            out.L = j.at("L").get<int>();
        auto num = [&](const char* key, double& field) {
            if (j.contains(key))
                field = j.at(key).get<double>();
        };
        num("w", out.w);
        num("kappa", out.kappa);
        num("lambda_loss", out.lambda_loss);
        num("Gamma", out.Gamma);
        num("u", out.u);
        num("gamma_ssh", out.gamma_ssh);
        num("T_nnn", out.T_nnn);
        num("phi", out.phi);
        if (j.contains("edge_loss"))
            out.edge_loss = parse_edge_loss(j.at("edge_loss").get<std::string>());
        s = out;
    } catch (const nlohmann::json::exception& e) {
        fail_config("InvalidConfig", std::string("ModelSpec JSON: ") + e.what());
    }
}

int site_count(const ModelSpec& spec)
{
    return spec.kind == ModelKind::SSH ? 2 * spec.L : spec.L;
}

double dissipative_gap(const ModelSpec& spec)
{
    const double sg = stat_sign(spec.statistics);
    switch (spec.kind) {
    case ModelKind::HN: return spec.kappa + spec.lambda_loss + sg * spec.Gamma;
    case ModelKind::SSH: return sg * spec.Gamma + 0.5 * (spec.kappa + spec.gamma_ssh);
    case ModelKind::NNN: return spec.kappa + sg * spec.Gamma;
    }
    return 0.0;
}

void validate(const ModelSpec& spec, bool allow_exceptional)
{
    if (spec.L < 1)
        fail_config("InvalidParameter", "ModelSpec: L must be >= 1");
    check_nonneg(spec.w, "w");
    check_nonneg(spec.kappa, "kappa");
    check_nonneg(spec.lambda_loss, "lambda_loss");
    check_nonneg(spec.Gamma, "Gamma");
    check_nonneg(spec.u, "u");
    check_nonneg(spec.gamma_ssh, "gamma_ssh");
    if (!std::isfinite(spec.T_nnn) || !std::isfinite(spec.phi))
        fail_config("InvalidParameter", "ModelSpec: T_nnn and phi must be finite");

    if (spec.kind != ModelKind::HN && spec.edge_loss != EdgeLoss::Uniform)
        fail_config("InvalidParameter", "ModelSpec: edge_loss applies to HN chains only");
    if (spec.kind != ModelKind::SSH) {
        if (spec.kappa > spec.w || (spec.kappa == spec.w && !allow_exceptional && spec.kappa > 0.0))
            fail_config("InvalidParameter", "ModelSpec: need w > kappa (kappa = w only on the closed-form path)");
    } else {
        if (spec.kappa > spec.w || spec.gamma_ssh > spec.u)
            fail_config("InvalidParameter", "ModelSpec: SSH needs kappa <= w and gamma_ssh <= u");
    }
    if (spec.statistics == Statistics::Boson && !(dissipative_gap(spec) > 0.0))
        fail_config("BosonUnstable", "ModelSpec: bosonic gap must be positive (Gamma below the loss rate)");
}

std::vector<double> hn_local_loss(const ModelSpec& spec)
{
    // End sites touch one correlated bond instead of two.
    const double extra = spec.edge_loss == EdgeLoss::Uniform ? 0.5 * spec.kappa : spec.kappa;
    std::vector<double> lam(static_cast<std::size_t>(spec.L), spec.lambda_loss);
    lam.front() += extra;
    lam.back() += extra;
    return lam;
}

CMatrix hn_bulk_matrix(const ModelSpec& spec)
{
    validate(spec, true);
    const Eigen::Index n = spec.L;
    const cdouble onsite = -kI * dissipative_gap(spec);
    CMatrix H = CMatrix::Zero(n, n);
    H.diagonal().setConstant(onsite);
    for (Eigen::Index j = 0; j + 1 < n; ++j) {
        H(j + 1, j) = 0.5 * (spec.w + spec.kappa);
        H(j, j + 1) = 0.5 * (spec.w - spec.kappa);
    }
    return H;
}

CMatrix hn_matrix(const ModelSpec& spec)
{
    CMatrix H = hn_bulk_matrix(spec);
    if (spec.edge_loss == EdgeLoss::Literal) {
        H(0, 0) -= 0.5 * kI * spec.kappa;
        H(spec.L - 1, spec.L - 1) -= 0.5 * kI * spec.kappa;
    }
    return H;
}

CMatrix effective_from_lindblad(const LindbladData& data, Statistics s)
{
    return data.H - 0.5 * kI * (data.Lmat + stat_sign(s) * data.Pmat);
}

HnModel build_hn(const ModelSpec& spec)
{
    if (spec.kind != ModelKind::HN)
        fail_config("UnsupportedModel", "build_hn(): spec.kind must be HN");
    validate(spec, true);
    const Eigen::Index n = spec.L;

    LindbladData data;
    data.H = CMatrix::Zero(n, n);
    data.Lmat = CMatrix::Zero(n, n);
    data.Pmat = 2.0 * spec.Gamma * CMatrix::Identity(n, n);
    for (Eigen::Index j = 0; j + 1 < n; ++j) {
        data.H(j + 1, j) = 0.5 * spec.w;
        data.H(j, j + 1) = 0.5 * spec.w;
        // kappa D[c_j - i c_{j+1}]: L_nm += kappa conj(x_n) x_m.
        const cdouble x[2] = {1.0, -kI};
        for (int a = 0; a < 2; ++a)
            for (int b = 0; b < 2; ++b)
                data.Lmat(j + a, j + b) += spec.kappa * std::conj(x[a]) * x[b];
    }
    const auto lam = hn_local_loss(spec);
    for (Eigen::Index j = 0; j < n; ++j)
        data.Lmat(j, j) += 2.0 * lam[static_cast<std::size_t>(j)];

    HnModel model{hn_matrix(spec), data};
    const double mismatch = (effective_from_lindblad(data, spec.statistics) - model.H_eff).cwiseAbs().maxCoeff();
    if (mismatch > 1e-12)
        fail_numeric("InvalidStatisticsSign", "build_hn(): Lindblad data disagree with the chain matrix by " +
                                                  std::to_string(mismatch));
    return model;
}

CMatrix build_ssh(const ModelSpec& spec)
{
    if (spec.kind != ModelKind::SSH)
        fail_config("UnsupportedModel", "build_ssh(): spec.kind must be SSH");
    validate(spec, true);
    const Eigen::Index n = 2 * spec.L;
    CMatrix H = CMatrix::Zero(n, n);
    H.diagonal().setConstant(-kI * dissipative_gap(spec));
    for (Eigen::Index c = 0; c < spec.L; ++c) {
        const Eigen::Index a = 2 * c, b = 2 * c + 1;
        H(b, a) = 0.5 * (spec.w + spec.kappa);
        H(a, b) = 0.5 * (spec.w - spec.kappa);
        if (c + 1 < spec.L) {
            H(a + 2, b) = 0.5 * (spec.u + spec.gamma_ssh);
            H(b, a + 2) = 0.5 * (spec.u - spec.gamma_ssh);
        }
    }
    return H;
}

CMatrix build_nnn(const ModelSpec& spec)
{
    if (spec.kind != ModelKind::NNN)
        fail_config("UnsupportedModel", "build_nnn(): spec.kind must be NNN");
    validate(spec, true);
    const Eigen::Index n = spec.L;
    CMatrix H = CMatrix::Zero(n, n);
    H.diagonal().setConstant(-kI * dissipative_gap(spec));
    const cdouble nnn = 0.5 * spec.T_nnn * std::polar(1.0, spec.phi);
    for (Eigen::Index j = 0; j + 1 < n; ++j) {
        H(j + 1, j) = 0.5 * (spec.w + spec.kappa);
        H(j, j + 1) = 0.5 * (spec.w - spec.kappa);
    }
    for (Eigen::Index j = 0; j + 2 < n; ++j) {
        H(j + 2, j) = nnn;
        H(j, j + 2) = std::conj(nnn);
    }
    return H;
}

CMatrix effective_hamiltonian(const ModelSpec& spec)
{
    switch (spec.kind) {
    case ModelKind::HN: return hn_matrix(spec);
    case ModelKind::SSH: return build_ssh(spec);
    case ModelKind::NNN: return build_nnn(spec);
    }
    return {};
}

double hn_inverse_xi(double w, double kappa)
{
    return 0.5 * std::log((w + kappa) / (w - kappa));
}

double hn_J(double w, double kappa)
{
    return std::sqrt((w + kappa) * (w - kappa));
}

double xi_prop_hn(double w, double Gamma, Statistics s)
{
    const double sg = stat_sign(s);
    const double inv = -sg * 2.0 * std::log(w / (w + sg * Gamma));
    return 1.0 / inv;
}

double xi_prop_hn_doubled(double w, double Gamma, Statistics s)
{
    return 2.0 * xi_prop_hn(w, Gamma, s);
}

double ssh_xi1(const ModelSpec& spec)
{
    return 1.0 / std::log((spec.u + spec.gamma_ssh) / (spec.w - spec.kappa));
}

double ssh_xi2(const ModelSpec& spec)
{
    return 1.0 / std::log((spec.w + spec.kappa) / (spec.u - spec.gamma_ssh));
}

Spectrum hn_spectral_analytic(const ModelSpec& spec)
{
    if (spec.kind != ModelKind::HN)
        fail_config("UnsupportedModel", "hn_spectral_analytic(): spec.kind must be HN");
    validate(spec, true);
    if (spec.kappa >= spec.w)
        fail_numeric("PerfectNonreciprocity", "hn_spectral_analytic(): kappa = w has no biorthogonal basis");
    if (spec.edge_loss != EdgeLoss::Uniform)
        fail_config("UnsupportedModel", "hn_spectral_analytic(): needs uniform edge loss");

    const Eigen::Index n = spec.L;
    const double g = hn_inverse_xi(spec.w, spec.kappa);
    const double J = hn_J(spec.w, spec.kappa);
    const double delta = dissipative_gap(spec);
    const double norm = std::sqrt(2.0 / static_cast<double>(n + 1));

    Spectrum s;
    s.scale_overflow = static_cast<double>(n) * g > 650.0;
    s.log_gauge = s.scale_overflow ? g : 0.0;
    s.nonnormality_log = static_cast<double>(n - 1) * g;
    s.eigenvalues.resize(n);
    s.right_vectors.resize(n, n);
    s.left_vectors.resize(n, n);
    for (Eigen::Index col = 0; col < n; ++col) {
        // Ascending real part: alpha runs from L down to 1.
        const Eigen::Index alpha = n - col;
        const double k = static_cast<double>(alpha) * M_PI / static_cast<double>(n + 1);
        s.eigenvalues[col] = cdouble(J * std::cos(k), -delta);
        for (Eigen::Index j = 1; j <= n; ++j) {
            const double base = norm * std::sin(k * static_cast<double>(j));
            const double gauge = s.scale_overflow ? 0.0 : static_cast<double>(j) * g;
            s.right_vectors(j - 1, col) = base * std::exp(gauge);
            s.left_vectors(j - 1, col) = base * std::exp(-gauge);
        }
    }
    const CMatrix overlap = s.left_vectors.adjoint() * s.right_vectors;
    s.biorth_residual = (overlap - CMatrix::Identity(n, n)).cwiseAbs().maxCoeff();
    if (!s.scale_overflow) {
        const CMatrix H = hn_matrix(spec);
        const double scale = std::max(norm_inf(H), 1e-300);
        double res = 0.0;
        for (Eigen::Index a = 0; a < n; ++a) {
            const auto& r = s.right_vectors.col(a);
            res = std::max(res, (H * r - s.eigenvalues[a] * r).norm() / (scale * r.norm()));
        }
        s.eig_residual = res;
    }
    return s;
}

double nonnormality_log(const ModelSpec& spec)
{
    const double cells = static_cast<double>(spec.L - 1);
    switch (spec.kind) {
    case ModelKind::HN:
    case ModelKind::NNN:
        if (spec.kappa >= spec.w)
            return std::numeric_limits<double>::infinity();
        return cells * hn_inverse_xi(spec.w, spec.kappa);
    case ModelKind::SSH:
        if (spec.kappa >= spec.w || spec.gamma_ssh >= spec.u)
            return std::numeric_limits<double>::infinity();
        return cells * 0.5 *
               std::log((spec.w + spec.kappa) * (spec.u + spec.gamma_ssh) /
                        ((spec.w - spec.kappa) * (spec.u - spec.gamma_ssh)));
    }
    return 0.0;
}

Scales derived_scales(const ModelSpec& spec)
{
    validate(spec, true);
    Scales sc;
    sc.Delta = dissipative_gap(spec);
    if (spec.kind == ModelKind::HN) {
        sc.J = hn_J(spec.w, spec.kappa);
        const double g = spec.kappa < spec.w ? hn_inverse_xi(spec.w, spec.kappa) : std::numeric_limits<double>::infinity();
        sc.xi_loc = 1.0 / g;
        if (spec.Gamma > 0.0)
            sc.xi_prop = xi_prop_hn(spec.w, spec.Gamma, spec.statistics);
        else
            sc.xi_prop = std::numeric_limits<double>::infinity();
        sc.tau_evec = static_cast<double>(spec.L) / (sc.xi_loc * sc.Delta);
    } else if (spec.kind == ModelKind::SSH) {
        sc.xi_loc = std::min(ssh_xi1(spec), ssh_xi2(spec));
        sc.tau_evec = static_cast<double>(spec.L) / (sc.xi_loc * sc.Delta);
    } else {
        fail_config("UnsetForModel", "derived_scales(): NNN localization length comes from localization_extract");
    }
    return sc;
}

} // namespace skin
