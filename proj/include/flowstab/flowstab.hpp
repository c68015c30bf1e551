// Copyright 2026 The flowstab Authors.
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

#ifndef FLOWSTAB_FLOWSTAB_HPP_
#define FLOWSTAB_FLOWSTAB_HPP_

#include "common.hpp"
#include "diffusion.hpp"
#include "error_model.hpp"
#include "experiments.hpp"
#include "graph.hpp"
#include "io.hpp"
#include "louvain.hpp"
#include "metrics.hpp"
#include "partition.hpp"
#include "sbm.hpp"
#include "sweep.hpp"
#include "symmetric_matrix.hpp"

#endif // FLOWSTAB_FLOWSTAB_HPP_
