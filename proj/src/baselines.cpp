#include "msgossip/baselines.hpp"

namespace msgossip {

template GossipRun path_averaging<PaNullObserver>(const GeoGraph&, std::vector<double>,
                                                  const StoppingRule&, const FailureModel&,
                                                  std::uint64_t, const GossipLimits&,
                                                  PaNullObserver);
template GossipRun geographic_gossip<GeoNullObserver>(const GeoGraph&, std::vector<double>,
                                                      const StoppingRule&, const FailureModel&,
                                                      std::uint64_t, const GossipLimits&,
                                                      GeoNullObserver);

}  // namespace msgossip
