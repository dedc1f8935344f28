// Copyright 2026 The ProSA Authors.
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

// UTF-8 helpers and the strip + casefold normalization applied inside the
// text metrics. Characters are Unicode code points.

#pragma once

#include <string>
#include <string_view>

namespace prosa::text {

/// Decodes UTF-8; malformed bytes become U+FFFD.
std::u32string decode_utf8(std::string_view in);
/// Decodes into out, reusing its storage.
void decode_utf8_into(std::string_view in, std::u32string& out);
std::string encode_utf8(std::u32string_view in);

bool is_space(char32_t c) noexcept;
char32_t casefold(char32_t c) noexcept;

/// Strips leading/trailing whitespace and case-folds. Internal whitespace is
/// preserved.
std::u32string normalize(std::string_view in);
void normalize_into(std::string_view in, std::u32string& out);
std::string normalize_utf8(std::string_view in);

/// Number of code points.
std::size_t length(std::string_view in);

}  // namespace prosa::text
