#pragma once

#include "toeplitz_hc/conformal.hpp"
#include "toeplitz_hc/symbol.hpp"
#include "toeplitz_hc/valence.hpp"

#include <optional>
#include <string>
#include <vector>

namespace toeplitz_hc::examples {

/**
 * A constructed symbol together with the pieces it was built from.
 *
 * `h` is set for the sector-annulus fixtures: the analytic map h = g^2(rho z)
 * whose reciprocal is `phi`.
 */
struct Fixture {
    std::string id;
    json params; // effective parameters, defaults filled in
    Symbol phi;
    std::optional<Symbol> h;
    std::vector<std::string> notes;

    [[nodiscard]] json to_json() const;
};

/// Known preset ids: rolewicz, tridiagonal, ex1 .. ex5, fig1, fig2, twofold.
const std::vector<std::string> &example_ids();

/// Builds a preset. Unknown keys in `params` are rejected with ParamInvalid.
Fixture example_symbol(const std::string &id, const json &params = json::object());

/// Defaults of a preset as a JSON object.
json default_params(const std::string &id);

/// h(z) = [(1 + eps Psi(rho z)) Psi(rho z)^2 - beta (1 + i)]^2 as an expression.
Expr sector_h_expr(const conformal::SectorAnnulusParams &p);

/// Region pattern of the first figure: a ring of k = 1 around k = 2 islands
/// touching only k = 1, a bounded hole, and descending chains to the
/// unbounded component.
bool matches_fig1_pattern(const valence::RegionMap &map, const valence::GeneralPositionReport &gp);

/// Region pattern of the second figure: general position, maximal count 2,
/// and some component with no descending chain to the unbounded component.
bool matches_fig2_pattern(const valence::RegionMap &map, const valence::GeneralPositionReport &gp);

struct BetaSearch {
    std::optional<double> beta;
    std::vector<double> hits; // every grid beta matching the pattern
    int tried = 0;
};

/// Scans beta over (r^2/sqrt 2, R^2/sqrt 2) on `steps` interior points and
/// reports those whose h map matches the requested figure (1 or 2). `beta`
/// is the hit closest to the middle of the longest run of consecutive hits.
BetaSearch search_beta(int figure, conformal::SectorAnnulusParams p, int steps = 64, int grid_n = 512);

} // namespace toeplitz_hc::examples
