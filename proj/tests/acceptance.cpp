// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

// Acceptance criteria, one PASS/FAIL line each. Exit status is the number
// of failed criteria.

#include <iostream>

#include "egkcap/validation.hpp"

int main()
{
    egkcap::validation::Options options;
    int failed = 0;
    egkcap::validation::run(options, [&](const egkcap::validation::CriterionResult& r) {
        std::cout << egkcap::validation::format_line(r) << std::endl;
        if (!r.passed) ++failed;
    });
    std::cout << (egkcap::validation::kCriterionCount - failed) << "/" << egkcap::validation::kCriterionCount
              << " criteria passed" << std::endl;
    return failed;
}
