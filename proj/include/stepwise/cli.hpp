// Licensed under the Apache License, Version 2.0.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "stepwise/snm.hpp"

namespace stepwise {

enum class ResultCategory {
  Ok,             // value, symbolic normal form, valid proof, discharged
  Diagnostics,    // unreadable input, ill-typed program, unknown logic, rejected script step
  ErrorResult,    // the program evaluated to ERROR
  Stuck,          // no rule applies, or the step limit ran out
  NotDischarged,  // invalid proof or failed verification
};

const char* category_name(ResultCategory c);
int exit_code(ResultCategory c);
ResultCategory category_of(Outcome o);

// Entry point of the stepwise binary. Reads STEPWISE_* variables for
// options not given on the command line.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace stepwise
