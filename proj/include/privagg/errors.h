// Copyright 2026 The privagg Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef PRIVAGG_ERRORS_H_
#define PRIVAGG_ERRORS_H_

#include <stdexcept>
#include <string>

namespace privagg {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct OverflowError : Error {
  using Error::Error;
};
struct DimensionMismatch : Error {
  using Error::Error;
};
struct InvalidBudget : Error {
  using Error::Error;
};
struct InsufficientClients : Error {
  using Error::Error;
};
struct InvalidThreshold : Error {
  using Error::Error;
};
struct InvalidConfig : Error {
  using Error::Error;
};
struct DuplicateClient : Error {
  using Error::Error;
};
struct TooManyDropouts : Error {
  using Error::Error;
};
struct InconsistentPartials : Error {
  using Error::Error;
};
struct NotPositiveDefinite : Error {
  using Error::Error;
};
struct ChannelClosed : Error {
  using Error::Error;
};
struct FaultInjected : Error {
  using Error::Error;
};
struct AuthenticationFailure : Error {
  using Error::Error;
};

}  // namespace privagg

#endif  // PRIVAGG_ERRORS_H_
