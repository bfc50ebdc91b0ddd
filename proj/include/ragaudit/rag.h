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

// RAG templates (plain and defended variants), rendering of retrieved context
// into the generator input, and the end-to-end query path.

#ifndef RAGAUDIT_RAG_H_
#define RAGAUDIT_RAG_H_

#include <string>
#include <string_view>
#include <vector>

#include "absl/status/statusor.h"
#include "ragaudit/model.h"
#include "ragaudit/retrieval.h"

namespace ragaudit {

inline constexpr std::string_view kUserPromptPlaceholder = "{user prompt}";
inline constexpr std::string_view kContextPlaceholder = "{context}";

enum class TemplateKind {
  kPlain,
  // Defense pointers inserted before the question.
  kDefended,
  // Llama chat layout: pointers in the system turn, context in the user turn.
  kLlamaSystemDefense1,
  // Llama chat layout: pointers and context in the system turn.
  kLlamaSystemDefense2,
};

std::string_view TemplateKindName(TemplateKind kind);
absl::StatusOr<TemplateKind> ParseTemplateKind(std::string_view name);

struct RagTemplate {
  TemplateKind kind = TemplateKind::kPlain;
  std::string body;
  // Placed between consecutive context documents.
  std::string context_joiner = "\n\n";

  friend bool operator==(const RagTemplate&, const RagTemplate&) = default;
};

// The pinned template text for `kind`.
RagTemplate BuiltinTemplate(TemplateKind kind);

// Canonical template for a defense kind; kPlain yields the plain template.
RagTemplate ApplyDefense(TemplateKind kind);

// Moves `base` to the layout of `kind`, keeping its context joiner.
// Idempotent: applying the same kind twice equals applying it once.
RagTemplate ApplyDefense(const RagTemplate& base, TemplateKind kind);

// Removes chat special markers ("<|...|>") and the line breaks that follow
// them, for generators without a chat format.
RagTemplate WithoutChatMarkers(const RagTemplate& tmpl);

// Reads a template fixture. CRLF is normalized to LF and a single trailing
// newline is dropped.
absl::StatusOr<RagTemplate> LoadTemplate(const std::string& path,
                                         TemplateKind kind);

// Substitutes the user prompt into every {user prompt} slot and the joined
// context documents into {context}. Substituted text is never re-scanned.
absl::StatusOr<std::string> Render(const RagTemplate& tmpl,
                                   const std::vector<std::string>& context_docs,
                                   std::string_view user_prompt);

struct ParsedPrompt {
  TemplateKind kind = TemplateKind::kPlain;
  std::string user_prompt;
  std::string context;
};

// Inverse of Render for a known template: recovers the user prompt and the
// joined context. NotFound when `rendered` does not fit the template.
absl::StatusOr<ParsedPrompt> ParseRendered(const RagTemplate& tmpl,
                                           std::string_view rendered);

// True when the text carries the defense pointers (whitespace-insensitive).
bool ContainsDefenseInstructions(std::string_view text);

struct RagSystem {
  const RetrievalIndex* index = nullptr;
  const Embedder* embedder = nullptr;
  Generator* generator = nullptr;
  RagTemplate rag_template;
  size_t k = 4;
};

struct RagResponse {
  GenerationResult generation;
  std::vector<RetrievalHit> hits;
  std::string rendered_prompt;
};

// search -> render -> generate. Everything is returned for audit logging.
absl::StatusOr<RagResponse> RagQuery(const RagSystem& system,
                                     std::string_view user_prompt,
                                     const GenerateOptions& options);

// One audit-log JSON line: {prompt, hit_ids, distances, rendered_hash,
// response_text, tokens?}.
std::string AuditLogLine(std::string_view user_prompt,
                         const RagResponse& response);

}  // namespace ragaudit

#endif  // RAGAUDIT_RAG_H_
