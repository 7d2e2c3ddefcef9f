// Copyright 2026 The mspir Authors
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

#pragma once

// Umbrella header.

#include "mspir/bench.hpp"
#include "mspir/bytes.hpp"
#include "mspir/client.hpp"
#include "mspir/combinatorics.hpp"
#include "mspir/database.hpp"
#include "mspir/error.hpp"
#include "mspir/hint_pool.hpp"
#include "mspir/keymap.hpp"
#include "mspir/multiset.hpp"
#include "mspir/params.hpp"
#include "mspir/pool_file.hpp"
#include "mspir/prg.hpp"
#include "mspir/privacy.hpp"
#include "mspir/protocol.hpp"
#include "mspir/server.hpp"
#include "mspir/stats.hpp"
#include "mspir/transport.hpp"
