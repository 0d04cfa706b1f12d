// Copyright 2026 The actrec Authors.
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

#include "actrec/checkpoint.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <string>

#include "actrec/errors.hpp"

namespace actrec {

namespace {

constexpr std::array<char, 8> kMagic = {'A', 'C', 'R', 'E', 'C', 'K', 'P', 'T'};

template <class U>
void put_le(std::ostream& out, U v) {
  char buf[sizeof(U)];
  for (std::size_t i = 0; i < sizeof(U); ++i)
    buf[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
  out.write(buf, sizeof(U));
}

template <class U>
U get_le(std::istream& in, const char* what) {
  unsigned char buf[sizeof(U)];
  if (!in.read(reinterpret_cast<char*>(buf), sizeof(U)))
    throw DataError(std::string("checkpoint truncated while reading ") + what);
  U v = 0;
  for (std::size_t i = 0; i < sizeof(U); ++i) v |= static_cast<U>(buf[i]) << (8 * i);
  return v;
}

std::uint32_t variant_code(Variant v) {
  switch (v) {
    case Variant::kNavigation: return 0;
    case Variant::kEarly: return 1;
    case Variant::kLate: return 2;
    case Variant::kClicks: return 3;
  }
  return 0;
}

}  // namespace

void save_checkpoint(std::ostream& out, const ModelParams<double>& params,
                     Variant variant) {
  out.write(kMagic.data(), kMagic.size());
  put_le<std::uint32_t>(out, kCheckpointVersion);
  put_le<std::uint32_t>(out, variant_code(variant));
  put_le<std::uint64_t>(out, static_cast<std::uint64_t>(params.vocab_size()));
  put_le<std::uint64_t>(out, static_cast<std::uint64_t>(params.embed_dim()));
  put_le<std::uint64_t>(out, static_cast<std::uint64_t>(params.hidden_dim()));
  visit_tensors(
      [&out](const std::string&, const auto& t) {
        for (Index i = 0; i < t.rows(); ++i)
          for (Index j = 0; j < t.cols(); ++j)
            put_le<std::uint64_t>(out, std::bit_cast<std::uint64_t>(double(t(i, j))));
      },
      params);
  if (!out) throw DataError("checkpoint: write failed");
}

Checkpoint load_checkpoint(std::istream& in) {
  std::array<char, 8> magic{};
  if (!in.read(magic.data(), magic.size()) || magic != kMagic)
    throw DataError("checkpoint: bad magic");
  const auto version = get_le<std::uint32_t>(in, "version");
  if (version != kCheckpointVersion)
    throw DataError("checkpoint: unsupported version " + std::to_string(version));
  const auto code = get_le<std::uint32_t>(in, "variant");
  if (code > 3) throw DataError("checkpoint: unknown variant " + std::to_string(code));
  const auto vocab = get_le<std::uint64_t>(in, "V_x");
  const auto d = get_le<std::uint64_t>(in, "d");
  const auto k = get_le<std::uint64_t>(in, "k");
  if (vocab < 2 || d < 1 || k < 1 || vocab > (1u << 30) || d > (1u << 20) ||
      k > (1u << 20))
    throw DataError("checkpoint: implausible dimensions");

  Checkpoint ck;
  constexpr Variant kByCode[] = {Variant::kNavigation, Variant::kEarly,
                                 Variant::kLate, Variant::kClicks};
  ck.variant = kByCode[code];
  ck.params = ModelParams<double>::zeros(static_cast<Index>(vocab),
                                         static_cast<Index>(d),
                                         static_cast<Index>(k));
  visit_tensors(
      [&in](const std::string& name, auto& t) {
        for (Index i = 0; i < t.rows(); ++i)
          for (Index j = 0; j < t.cols(); ++j)
            t(i, j) = std::bit_cast<double>(get_le<std::uint64_t>(in, name.c_str()));
        if (!all_finite(t)) throw DataError("checkpoint: non-finite values in " + name);
      },
      ck.params);
  if (in.peek() != std::char_traits<char>::eof())
    throw DataError("checkpoint: trailing bytes");
  return ck;
}

}  // namespace actrec
