#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "biochain/csv.hpp"
#include "biochain/domain.hpp"

namespace biochain::io {

// The manifest is a small JSON document naming the CSV files that make up an
// instance. Paths are resolved relative to the manifest's directory.
struct Manifest {
    int version = 1;
    int horizon = 52;
    std::map<std::string, std::string> files;

    bool operator==(const Manifest&) const = default;
};

// Reads the full instance description from external files, validates it, and
// returns the immutable Instance. Unknown columns and unknown file keys are
// ignored; a note per ignored item is appended to *warnings when given.
// Throws IngestError on IO, parse, schema, or validation problems.
Instance load_instance(const std::filesystem::path& manifest_path,
                       std::vector<std::string>* warnings = nullptr);

// Canonical ordering: entities sorted by id (arcs by from, to, vehicle).
Instance canonical(const Instance& instance);

// Writes the instance in canonical order (entities sorted by id, quantities
// as shortest round-trip decimals) so that load(write(x)) == canonical(x).
Manifest write_instance(const Instance& instance, const std::filesystem::path& dir);

}  // namespace biochain::io
