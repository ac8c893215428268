#pragma once

#include "visar/citymodel.hpp"
#include "visar/hedonic.hpp"
#include "visar/vcscore.hpp"
#include "visar/viewmetrics.hpp"

#include <string>
#include <vector>

namespace visar {

/// Small synthetic commune on a flat 1 km x 1 km grid: a lake strip along
/// the southern edge, a forest patch with canopy, a road, and 20 detached
/// buildings in three rows. The shoreline row is nearly continuous so that
/// inland buildings only glimpse the lake through the gaps.
CityModel make_toy_commune();

/// Writes the toy commune to dir/{terrain,canopy,landcover}.asc and
/// dir/buildings.geojson.
void write_toy_commune(const std::string& dir);

/// A three-tower replacement massing for the toy commune, sized to replace
/// two inland buildings.
std::vector<Building> make_toy_massing();

/// Which toy buildings the massing replaces.
std::vector<std::string> toy_massing_removed_ids();

/// Shipped linear scorer: rewards water, nature, urban green, sky and far
/// views; penalizes industrial, major-road and rail exposure.
VcScorer make_reference_scorer(const MetricRegistry& registry);

/// Pre-fitted lakeside pricing model (agglomeration-conditioned VC), used
/// for appraisal when no transaction data is at hand.
HedonicModel make_lakeside_model();

} // namespace visar
