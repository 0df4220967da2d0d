#pragma once

#include "lcorder/continuous.hpp"
#include "lcorder/pmf.hpp"

#include <json.hpp>

#include <ostream>
#include <stdexcept>

namespace lcorder {

/// Malformed or incomplete input document.
class InputError : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

nlohmann::json to_json(FamilySpec const& spec);
FamilySpec family_from_json(nlohmann::json const& j);

/// Canonical form: {"kind": "explicit", "offset", "weights", "tail_bound",
/// "infinite_support", "label"}. Realised families also carry "family" so a
/// reader can extend them. When some weight underflows, "log_weights"
/// replaces "weights".
nlohmann::json to_json(Pmf const& f);

/// Builds a pmf from a spec document. Kinds: bernoulli {p}, binomial {n, p},
/// poisson {lambda}, geometric {p}, negbinomial {n, r}, bernoulli_sum {ps},
/// geometric_sum {rs}, explicit {weights | log_weights, offset, tail_bound,
/// infinite_support, label, family}, convolution {of: [spec...]},
/// mixture {components: [spec...], weights}.
Pmf pmf_from_json(nlohmann::json const& j, double eps_trunc = kDefaultTruncation);

/// Continuous kinds: gamma {alpha, beta}, gamma_sum {alphas, betas},
/// gamma_mixture {alpha, betas, weights}.
GridPdf grid_from_json(nlohmann::json const& j, GridSpec const& spec = {});
bool is_continuous_spec(nlohmann::json const& j);

/// "# " + grid_header on the first line, then "x,density,density_error" rows.
void write_grid_csv(std::ostream& out, GridPdf const& f);

} // namespace lcorder
