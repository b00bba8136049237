#pragma once

#include <string>
#include <vector>

#include "normot/cycles.hpp"
#include "normot/diagnostics.hpp"
#include "normot/kantorovich.hpp"
#include "normot/monge.hpp"
#include "normot/partition.hpp"

namespace normot::io {

std::string read_file(const std::string& path);
// Creates parent directories.
void write_file(const std::string& path, const std::string& text);

// {"dim": d, "dual_vertices": [[...], ...]}
NormPtr parse_norm_json(const std::string& text);
std::string norm_to_json(const PolyhedralNorm& n);
// l1 | linf | poly:<path> | polygon:<m>
NormPtr norm_from_spec(const std::string& spec, int dim);

// "0,2,3" -> {0,2,3}
IndexSet parse_index_set(const std::string& text);

// i,j,mass,cost
std::string plan_to_csv(const TransportPlan& plan, const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                        const CostFn& cost);
// Reads i,j[,mass[,cost]]; missing masses are 0 (carriage files).
TransportPlan parse_plan_csv(const std::string& text);

// point_id,psi
std::string potentials_to_csv(const Potential& p);

std::string partition_to_json(const DirectedPartition& part);
// Cones are rebuilt from the active sets when a norm is given.
DirectedPartition parse_partition_json(const std::string& text, const DiscreteMeasure& mu, const NormPtr& norm);

std::string class_dump_to_json(const std::vector<ClassDumpEntry>& dump);

// source_id,target_id (-1 for split atoms)
std::string map_to_csv(const std::vector<int>& target_of);
// i,j,mass
std::string residual_to_csv(const std::vector<PlanEntry>& residual);

std::string pushforward_to_json(const PushforwardReport& r);
// t,density,bound series per slice profile
std::string density_series_csv(const DisintegrationReport& r);

}  // namespace normot::io
