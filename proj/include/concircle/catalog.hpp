#pragma once

#include <map>
#include <string>
#include <vector>

#include "concircle/manifest.hpp"

namespace concircle {

struct CatalogEntry {
    std::string name;
    std::string summary;
    std::map<std::string, std::string> defaults;
};

/// All built-in model spaces and space-time classes, with their default
/// parameters.
const std::vector<CatalogEntry>& catalog_entries();

/// Generates the manifest for a catalog entry. Parameters are given as
/// strings (numeric where the entry expects a number); unknown names or
/// out-of-range values raise ArgumentError listing what is valid.
Manifest catalog_build(const std::string& name,
                       const std::map<std::string, std::string>& params = {});

} // namespace concircle
