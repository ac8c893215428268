#pragma once

#include <array>
#include <string>

namespace visar {

/// Landcover / hit categories. Codes are the values stored in the landcover
/// grid; Sky, Facade, Roof and Vegetation are assigned by the caster itself.
enum Category : int {
    kCatSky = 1,
    kCatFacade = 2,
    kCatRoof = 3,
    kCatVegetation = 4,
    kCatWater = 5,
    kCatRiver = 6,
    kCatNature = 7,
    kCatAgriculture = 8,
    kCatGrass = 9,
    kCatLocalRoad = 10,
    kCatMajorRoad = 11,
    kCatRail = 12,
    kCatIndustrial = 13,
    kCatResidential = 14,
    kCatCommercial = 15,
    kCatRock = 16,
    kCatGlacier = 17,
    kCatWetland = 18,
    kCatUrbanGreen = 19,
    kCatOther = 20,
};

inline constexpr int kNumCategories = 20;
inline constexpr int kNumDistanceBins = 4;

inline const std::array<std::string, kNumCategories>& category_names() {
    static const std::array<std::string, kNumCategories> names = {
        "Sky",        "Facade",      "Roof",  "Vegetation", "Water",
        "River",      "Nature",      "Agriculture", "Grass", "LocalRoad",
        "MajorRoad",  "Rail",        "Industrial", "Residential", "Commercial",
        "Rock",       "Glacier",     "Wetland", "UrbanGreen", "Other",
    };
    return names;
}

/// -1 when the name is unknown.
int category_code(const std::string& name);

/// Sentiment groups used by the composite metrics.
inline constexpr std::array<int, 4> kPositiveCategories = {kCatWater, kCatNature, kCatUrbanGreen,
                                                           kCatGrass};
inline constexpr std::array<int, 3> kNegativeCategories = {kCatIndustrial, kCatMajorRoad, kCatRail};
inline constexpr std::array<int, 4> kNeutralCategories = {kCatFacade, kCatRoof, kCatResidential,
                                                          kCatCommercial};

} // namespace visar
