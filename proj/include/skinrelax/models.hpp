#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "skinrelax/linalg.hpp"

namespace skin {

enum class ModelKind { HN, SSH, NNN };
enum class Statistics { Fermion, Boson };

// Extra loss on the two end sites of an HN chain. Uniform adds kappa/2 so the effective
// Hamiltonian keeps the bulk diagonal everywhere; Literal adds kappa, which leaves the end
// sites with an additional -i kappa/2.
enum class EdgeLoss { Uniform, Literal };

// Upper sign for fermions, lower for bosons.
inline double stat_sign(Statistics s) { return s == Statistics::Fermion ? 1.0 : -1.0; }

const char* to_string(ModelKind k);
const char* to_string(Statistics s);
const char* to_string(EdgeLoss e);
ModelKind parse_model_kind(const std::string& s);
Statistics parse_statistics(const std::string& s);
EdgeLoss parse_edge_loss(const std::string& s);

struct ModelSpec {
    ModelKind kind = ModelKind::HN;
    Statistics statistics = Statistics::Fermion;
    int L = 2;               // sites (HN, NNN) or unit cells (SSH)
    double w = 1.0;          // coherent hopping
    double kappa = 0.0;      // correlated loss
    double lambda_loss = 0.0;
    double Gamma = 0.0;      // incoherent pump
    double u = 1.0;          // SSH inter-cell hopping
    double gamma_ssh = 0.0;  // SSH inter-cell non-reciprocity
    double T_nnn = 0.0;      // NNN amplitude
    double phi = 0.0;        // NNN phase
    EdgeLoss edge_loss = EdgeLoss::Uniform; // HN only
};

void to_json(nlohmann::json& j, const ModelSpec& s);
void from_json(const nlohmann::json& j, ModelSpec& s);

int site_count(const ModelSpec& spec);
double dissipative_gap(const ModelSpec& spec);

// Throws on invalid parameters; allow_exceptional admits kappa == w for HN.
void validate(const ModelSpec& spec, bool allow_exceptional = false);

struct LindbladData {
    CMatrix H;    // Hermitian hopping matrix
    CMatrix Lmat; // loss
    CMatrix Pmat; // pump
};

struct HnModel {
    CMatrix H_eff;
    LindbladData lindblad;
};

// Local loss rates lambda_j entering 2 lambda_j D[c_j].
std::vector<double> hn_local_loss(const ModelSpec& spec);

// Tridiagonal chain matrix with the bulk diagonal on every site.
CMatrix hn_bulk_matrix(const ModelSpec& spec);
// Effective Hamiltonian of the HN Lindbladian, including end-site corrections.
CMatrix hn_matrix(const ModelSpec& spec);
HnModel build_hn(const ModelSpec& spec);
CMatrix build_ssh(const ModelSpec& spec);
CMatrix build_nnn(const ModelSpec& spec);
CMatrix effective_hamiltonian(const ModelSpec& spec);
CMatrix effective_from_lindblad(const LindbladData& data, Statistics s);

Spectrum hn_spectral_analytic(const ModelSpec& spec);

double hn_inverse_xi(double w, double kappa);
double hn_J(double w, double kappa);
double xi_prop_hn(double w, double Gamma, Statistics s);
// Length in the convention where heights scale as e^{-+2d/xi}; twice the main definition.
double xi_prop_hn_doubled(double w, double Gamma, Statistics s);
double ssh_xi1(const ModelSpec& spec);
double ssh_xi2(const ModelSpec& spec);

// Log of the largest coefficient a spectral sum over the chain has to cancel.
double nonnormality_log(const ModelSpec& spec);

struct Scales {
    std::optional<double> J;
    double xi_loc = 0.0;
    double Delta = 0.0;
    std::optional<double> xi_prop;
    double tau_evec = 0.0;
};

Scales derived_scales(const ModelSpec& spec);

} // namespace skin
