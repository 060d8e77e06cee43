/* Copyright 2026-present sfusim contributors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *   http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef SFU_CLI_COMMANDS_HPP
#define SFU_CLI_COMMANDS_HPP

#include <iostream>
#include <string>
#include <vector>

namespace sfu::cli {

// Exit codes: 0 success, 2 usage error, 1 runtime error.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, char** argv);

}  // namespace sfu::cli

#endif  // SFU_CLI_COMMANDS_HPP
