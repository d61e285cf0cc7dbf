#pragma once
// Arrival machinery shared by every model: simulation windows with halos
// and lazy space-time arrival streams. A stream produces strictly
// increasing event times at rate equal to the halo-expanded window measure,
// with positions uniform on the expanded window. Whether the times mean
// "age before the observation instant" (perfect simulation) or forward
// clock time is up to the caller; the law of the stream is the same.

#include <cstdint>

#include "dl/geometry.hpp"
#include "dl/grains.hpp"
#include "dl/rng.hpp"

namespace dl {

// Key for deriving independent substreams. Any (replicate, purpose) pair can
// be regenerated in isolation, so replicates parallelise deterministically.
struct RngKey {
    uint64_t seed = 0;
    uint64_t experiment = 0;
    uint64_t replicate = 0;

    RngStream stream(uint64_t purpose) const {
        return RngStream::keyed(seed, experiment, replicate, purpose);
    }
    RngKey with_replicate(uint64_t r) const { return {seed, experiment, r}; }
    RngKey with_experiment(uint64_t e) const { return {seed, e, replicate}; }
};

struct Window1D {
    double length = 0.0;
    double halo = 0.0;
    double expanded_measure() const { return length + 2.0 * halo; }
};

struct Window2D {
    Box2 box;
    double halo = 0.0;
    Box2 expanded() const { return box.expanded(halo); }
    double expanded_measure() const { return expanded().area(); }
};

struct Arrival1D {
    double pos = 0.0;
    double time = 0.0;
    GrainLaw1D::Shape shape;
    uint32_t index = 0;
};

struct Arrival2D {
    Vec2 pos;
    double time = 0.0;
    GrainLaw2D::Shape shape;
    uint32_t index = 0;
};

class Stream1D {
public:
    Stream1D(Window1D w, const GrainLaw1D& law, const RngKey& key, double t0 = 0.0);
    Arrival1D next();
    double time() const { return t_; }

private:
    Window1D win_;
    const GrainLaw1D* law_;
    RngStream arr_, shp_;
    double t_, rate_;
    uint32_t idx_ = 0;
};

class Stream2D {
public:
    Stream2D(Window2D w, const GrainLaw2D& law, const RngKey& key, double t0 = 0.0);
    Arrival2D next();
    double time() const { return t_; }

private:
    Window2D win_;
    const GrainLaw2D* law_;
    RngStream arr_, shp_;
    double t_, rate_;
    uint32_t idx_ = 0;
};

}  // namespace dl
