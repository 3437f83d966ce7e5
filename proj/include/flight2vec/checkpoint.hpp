/*
 * Copyright 2026 The flight2vec Authors
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

#pragma once

#include <string>

#include "flight2vec/encoder.hpp"
#include "flight2vec/heads.hpp"

namespace f2v {

inline constexpr int kCheckpointFormatVersion = 1;

/// Self-describing JSON container: format version, all hyperparameters,
/// normalization stats, parameter blocks in declared order. Loading a file
/// with a different format version throws CheckpointError.
void save_model(const Model& model, const std::string& path);
Model load_model(const std::string& path);

/// Head checkpoints use the same container with a head_kind tag
/// ("ftp" | "fr" | "ad").
void save_ftp_head(const FtpHead& head, const std::string& path);
FtpHead load_ftp_head(const std::string& path);
void save_fr_head(const FrHead& head, const std::string& path);
FrHead load_fr_head(const std::string& path);
void save_ad_head(const AdHead& head, const std::string& path);
AdHead load_ad_head(const std::string& path);

}  // namespace f2v
