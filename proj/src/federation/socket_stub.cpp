// Built when EIGENFED_SOCKET_TRANSPORT is OFF.
#include "eigenfed/errors.hpp"
#include "eigenfed/federation/transport.hpp"

namespace eigenfed::federation {

std::unique_ptr<Transport> make_socket_transport(std::string, std::uint16_t) {
  throw TransportError("socket transport not compiled in");
}

bool socket_transport_available() noexcept { return false; }

} // namespace eigenfed::federation
