#pragma once

#include <map>
#include <string>

#include "q2b/model.hpp"

namespace q2b {

// Built-in generators, selected by name. Recognized names and parameters:
//   zero                  -- f = 0
//   linear_z              -- f = k z                          (param k)
//   purely_quadratic      -- f = (gamma/2) a z^2              (param gamma)
//   quadratic_plus_linear -- f = k z + (gamma/2) a z^2        (params k, gamma)
//   risk_sensitive_inner  -- f = z g0 + h0 + (theta/2) a z^2  (params g0, h0, theta)
// a_low is needed to declare a valid constant growth bound for the linear terms.
GeneratorSpec make_generator(const std::string& name,
                             const std::map<std::string, double>& params, double a_low);

// Built-in terminal conditions on the clipped range [-clip, clip] around 0:
//   constant, identity, square, neg_square, cubic
// `c` is the constant value (constant) or an additive shift (all others).
TerminalSpec make_terminal(const std::string& name, double clip, double c = 0.0);

// g + m, with the bound adjusted.
TerminalSpec shift_terminal(const TerminalSpec& base, double m);

} // namespace q2b
