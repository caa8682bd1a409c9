#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "perifem/assembly.hpp"
#include "perifem/fracture.hpp"
#include "perifem/mesh.hpp"

namespace perifem {

/// Legacy ASCII VTK unstructured grid with point data "displacement" and
/// "damage". Output is byte-for-byte reproducible for identical input.
void export_field_vtk(const Mesh& mesh, const Vector& d, const std::vector<double>& phi,
                      const std::filesystem::path& path);

/// Column names of the load-history table.
std::vector<std::string> history_columns(const LoadHistory& history);

/// One row per increment; force columns hold the tracked component of each
/// set's reaction resultant.
void export_history_csv(const LoadHistory& history, const std::filesystem::path& path);

} // namespace perifem
