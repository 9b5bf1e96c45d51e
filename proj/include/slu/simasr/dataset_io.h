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

#ifndef SLU_SIMASR_DATASET_IO_H_
#define SLU_SIMASR_DATASET_IO_H_

#include <filesystem>

#include "slu/simasr/asr.h"

namespace slu::simasr {

enum class EmbeddingStorage { kSidecar, kInline };

// Writes one JSON object per line:
//   {id, domain, ref_words, parse_string, hyp_words, hyp_logprob, label,
//    e_txt_path?, e_aud_path? | e_txt?, e_aud?}
// With kSidecar the embeddings go to `<path>.emb`: magic "SLUEMB01",
// u32 version, u64 count, then per record {u32 id_len, id bytes, u64 offset,
// u32 U, u32 T, u32 D}, then little-endian float32 data (e_txt then e_aud per
// record, offsets counted in floats from the start of the data block).
void WriteDataset(const std::filesystem::path& path, const Dataset& data,
                  EmbeddingStorage storage = EmbeddingStorage::kSidecar);

// Throws IoError on missing files, bad JSON, or a sidecar/index mismatch.
Dataset ReadDataset(const std::filesystem::path& path);

}  // namespace slu::simasr

#endif  // SLU_SIMASR_DATASET_IO_H_
