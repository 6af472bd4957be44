#pragma once

namespace epimob {

struct LatLon {
    double lat = 0.0;
    double lon = 0.0;
};

// Great-circle distance in kilometers (mean Earth radius 6371.0088 km).
double haversine_km(const LatLon& a, const LatLon& b);

} // namespace epimob
