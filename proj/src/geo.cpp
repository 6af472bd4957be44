#include "epimob/geo.hpp"

#include <cmath>

namespace epimob {

double haversine_km(const LatLon& a, const LatLon& b)
{
    constexpr double kEarthRadiusKm = 6371.0088;
    constexpr double kDegToRad      = 3.14159265358979323846 / 180.0;
    const double lat1               = a.lat * kDegToRad;
    const double lat2               = b.lat * kDegToRad;
    const double dlat               = (b.lat - a.lat) * kDegToRad;
    const double dlon               = (b.lon - a.lon) * kDegToRad;
    const double s1                 = std::sin(dlat / 2.0);
    const double s2                 = std::sin(dlon / 2.0);
    const double h                  = s1 * s1 + std::cos(lat1) * std::cos(lat2) * s2 * s2;
    return 2.0 * kEarthRadiusKm * std::asin(std::min(1.0, std::sqrt(h)));
}

} // namespace epimob
