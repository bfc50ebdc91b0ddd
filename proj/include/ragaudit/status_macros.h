// Copyright 2026 The RAG Audit Authors
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

#ifndef RAGAUDIT_STATUS_MACROS_H_
#define RAGAUDIT_STATUS_MACROS_H_

#include "absl/status/status.h"
#include "absl/status/statusor.h"

#define RAGAUDIT_RETURN_IF_ERROR(expr)             \
  do {                                             \
    const absl::Status _ragaudit_status = (expr);  \
    if (!_ragaudit_status.ok()) return _ragaudit_status; \
  } while (0)

#define RAGAUDIT_CONCAT_INNER(a, b) a##b
#define RAGAUDIT_CONCAT(a, b) RAGAUDIT_CONCAT_INNER(a, b)

#define RAGAUDIT_ASSIGN_OR_RETURN_IMPL(tmp, lhs, expr) \
  auto tmp = (expr);                                   \
  if (!tmp.ok()) return tmp.status();                  \
  lhs = *std::move(tmp)

#define RAGAUDIT_ASSIGN_OR_RETURN(lhs, expr) \
  RAGAUDIT_ASSIGN_OR_RETURN_IMPL(            \
      RAGAUDIT_CONCAT(_ragaudit_statusor_, __LINE__), lhs, expr)

#endif  // RAGAUDIT_STATUS_MACROS_H_
