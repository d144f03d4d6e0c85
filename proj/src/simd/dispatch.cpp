// Copyright 2026-present the diga authors
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

#include <cstdlib>
#include <string_view>

#include "diga/simd.h"

namespace diga::simd {

namespace {

const KernelTable&
pick() {
    const char* env = std::getenv("DIGA_SIMD");
    std::string_view want = env != nullptr ? env : "";
    if (want == "scalar") {
        return scalar_kernels();
    }
    if (want == "avx2" && avx2_kernels() != nullptr) {
        return *avx2_kernels();
    }
    if (want == "neon" && neon_kernels() != nullptr) {
        return *neon_kernels();
    }
    if (avx2_kernels() != nullptr) {
        return *avx2_kernels();
    }
    if (neon_kernels() != nullptr) {
        return *neon_kernels();
    }
    return scalar_kernels();
}

}  // namespace

const KernelTable&
active_kernels() {
    static const KernelTable& table = pick();
    return table;
}

}  // namespace diga::simd
