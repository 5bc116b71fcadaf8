/*
 * Copyright 2026 The olapnet Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

/**
 * @file queries.hpp
 * @brief Distributed query plans and the single-node oracle.
 */

#pragma once

#include "olapnet/queries/oracle.hpp"

namespace olapnet::queries {

/// Runs one plan on this node. The full result is returned on node 0; other
/// nodes return the column names with no rows.
inline QueryResult run_query(ClusterCtx& ctx, const Database& db, int id, const std::string& variant,
                             const QueryParams& params = {}) {
  switch (id) {
    case 1: return run_q1(ctx, db, params, variant);
    case 2: return run_q2(ctx, db, params, variant);
    case 3: return run_q3(ctx, db, params, variant);
    case 4: return run_q4(ctx, db, params, variant);
    case 5: return run_q5(ctx, db, params, variant);
    case 11: return run_q11(ctx, db, params, variant);
    case 13: return run_q13(ctx, db, params, variant);
    case 14: return run_q14(ctx, db, params, variant);
    case 15: return run_q15(ctx, db, params, variant);
    case 18: return run_q18(ctx, db, params, variant);
    case 21: return run_q21(ctx, db, params, variant);
    default: throw InvalidArgument("query " + std::to_string(id) + " is not implemented");
  }
}

}  // namespace olapnet::queries
