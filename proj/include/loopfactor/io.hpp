#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "loopfactor/factorization.hpp"
#include "loopfactor/laurent.hpp"
#include "loopfactor/loops.hpp"
#include "loopfactor/operators.hpp"
#include "loopfactor/symbolic.hpp"

namespace loopfactor::io {

using nlohmann::json;

/// {"min_deg", "max_deg", "coeffs": {"<deg>": [[re, im] x 4 row-major]}}
json loop_to_json(const MatrixLaurent& g);
MatrixLaurent loop_from_json(const json& j);

/// {"min_deg", "max_deg", "coeffs": {"<deg>": [re, im]}}
json scalar_to_json(const ScalarLaurent& f);

/// {"eta": [[re, im]...], "chi0": im, "chi": [[re, im]...], "zeta": [[re, im]...]}; missing keys are empty.
json params_to_json(const RootParams& p);
RootParams params_from_json(const json& j);

json factors_to_json(const TriangularFactors& f);
json recovered_to_json(const RecoveredParams& r);
json classification_to_json(const Classification& c);
json label_to_json(StratumLabel w);
StratumLabel label_from_json(const json& j);

json report_to_json(const IdentityReport& r);

/// Canonical order: id, then N.
void sort_reports(std::vector<IdentityReport>& reports);

/// One JSON object per line.
void write_reports_jsonl(std::ostream& os, const std::vector<IdentityReport>& reports);

/// Header id,N,lhs,rhs,abs_err,rel_err,seconds,tol,pass; reals in %.17g.
void write_reports_csv(std::ostream& os, const std::vector<IdentityReport>& reports);

/// Header table,n,k,monomial,coefficient,positive_integer.
void write_table_csv(std::ostream& os, const CoefficientTable& t);
json table_to_json(const CoefficientTable& t);

/// Multi-indices as dash-joined integers, "1-2-1".
std::string multi_index_key(const MultiIndex& I);

/// Reads a JSON file; throws std::invalid_argument with the path on failure.
json read_json_file(const std::string& path);

std::string format_real(double x);

}  // namespace loopfactor::io
