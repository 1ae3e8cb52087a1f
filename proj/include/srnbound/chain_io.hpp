#pragma once

#include <filesystem>
#include <iosfwd>

#include "srnbound/bounds.hpp"

namespace srnbound {

/**
 * Chain CSV: '#'-prefixed metadata lines, an `ell,offset,rate` section with
 * the nonzero exact rates, a blank line, then the tail section
 * `offset,slope,intercept,onset,period,residue,quadratic,cubic`.
 */
void write_chain_csv(const BoundingChain& chain, std::ostream& out);
void write_chain_csv(const BoundingChain& chain, const std::filesystem::path& path);
BoundingChain read_chain_csv(std::istream& in);
BoundingChain read_chain_csv(const std::filesystem::path& path);

}  // namespace srnbound
