#pragma once

#include <filesystem>
#include <string>

#include "json.hpp"
#include "suitmap/dataset.hpp"
#include "suitmap/pipeline.hpp"
#include "suitmap/raster.hpp"

namespace suitmap {

// Strict schema: unknown keys and type mismatches raise ConfigError carrying
// the JSON path (e.g. ".iteration.weight_tol").
PipelineConfig parse_config(const std::filesystem::path& path);
PipelineConfig parse_config_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {});
nlohmann::json config_to_json(const PipelineConfig& cfg);

ReclassTable reclass_from_json(const nlohmann::json& j, const std::string& path = "");
nlohmann::json reclass_to_json(const ReclassTable& t);

// Default reclassification tables for the synthetic study.
ReclassTable default_landcover_table();
ReclassTable default_slope_table();
ReclassTable default_network_distance_table();  // road and rail, metres
ReclassTable default_urban_distance_table();    // metres
ReclassTable default_supply_demand_table();

// Layer files named as `gen-synthetic` writes them, paths relative to the config.
PipelineConfig default_pipeline_config();

// Two-column `zone_id,value` CSV with header.
ZoneTable read_zone_table(const std::filesystem::path& path);
void write_zone_table(const ZoneTable& table, const std::filesystem::path& path);

}  // namespace suitmap
