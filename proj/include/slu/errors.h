// Copyright 2026 The mcat-slu Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef SLU_ERRORS_H_
#define SLU_ERRORS_H_

#include <stdexcept>
#include <string>

namespace slu {

// Base class for every error raised by the library. Subclasses carry the
// error kind in their type so callers can catch narrowly.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define SLU_DEFINE_ERROR(Name)                                   \
  class Name : public Error {                                    \
   public:                                                       \
    explicit Name(const std::string& what) : Error(#Name ": " + what) {} \
  }

SLU_DEFINE_ERROR(MalformedParse);
SLU_DEFINE_ERROR(EmptyReference);
SLU_DEFINE_ERROR(InvalidGrammar);
SLU_DEFINE_ERROR(UnknownToken);
SLU_DEFINE_ERROR(Unreachable);
SLU_DEFINE_ERROR(ShapeMismatch);
SLU_DEFINE_ERROR(InvalidHeads);
SLU_DEFINE_ERROR(DomainError);
SLU_DEFINE_ERROR(EmptyDataset);
SLU_DEFINE_ERROR(MissingScore);
SLU_DEFINE_ERROR(NegativeWer);
SLU_DEFINE_ERROR(NonBinaryScore);
SLU_DEFINE_ERROR(ConfigError);
SLU_DEFINE_ERROR(IoError);
SLU_DEFINE_ERROR(NotImplemented);

#undef SLU_DEFINE_ERROR

}  // namespace slu

#endif  // SLU_ERRORS_H_
