// Licensed under the Apache License, Version 2.0.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <json.hpp>

#include "stepwise/program.hpp"

namespace stepwise {

// Canonical tree encoding: {"kind": ..., fields...}. Spans are included when
// requested and ignored on input unless present.
nlohmann::json expr_to_json(const Expr& e, bool with_spans = false);
Expr expr_from_json(const nlohmann::json& j);

nlohmann::json type_to_json(const Type& t);
nlohmann::json program_to_json(const Program& p);

}  // namespace stepwise
