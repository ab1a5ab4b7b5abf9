#include "vssd/flash.hpp"

#include <algorithm>
#include <charconv>
#include <string>

#include "vssd/error.hpp"

namespace vssd {

void FlashGeometry::validate() const {
  if (blocks < 2) {
    throw Error(Errc::kInvalidGeometry, "need at least 2 blocks");
  }
  if (pages_per_block < 1 || page_size < 1) {
    throw Error(Errc::kInvalidGeometry,
                "pages_per_block and page_size must be >= 1");
  }
}

FlashGeometry parse_geometry(std::string_view text) {
  FlashGeometry g;
  std::uint32_t parts[3] = {0, 0, 0};
  std::size_t start = 0;
  for (int i = 0; i < 3; ++i) {
    auto end = text.find('x', start);
    if ((i < 2) != (end != std::string_view::npos)) {
      throw Error(Errc::kInvalidGeometry,
                  "expected BxPxS, got '" + std::string(text) + "'");
    }
    auto field = text.substr(start, end == std::string_view::npos
                                        ? std::string_view::npos
                                        : end - start);
    auto [ptr, ec] =
        std::from_chars(field.data(), field.data() + field.size(), parts[i]);
    if (field.empty() || ec != std::errc{} ||
        ptr != field.data() + field.size()) {
      throw Error(Errc::kInvalidGeometry,
                  "expected BxPxS, got '" + std::string(text) + "'");
    }
    start = end + 1;
  }
  g.blocks = parts[0];
  g.pages_per_block = parts[1];
  g.page_size = parts[2];
  g.validate();
  return g;
}

FlashArray::FlashArray(FlashGeometry geometry) : geometry_(geometry) {
  geometry_.validate();
  const auto n = geometry_.total_pages();
  data_.assign(n * geometry_.page_size, 0);
  lengths_.assign(n, 0);
  oob_.assign(n, OobRecord{});
  state_.assign(n, PageState::kFree);
  erase_counts_.assign(geometry_.blocks, 0);
}

void FlashArray::check(Ppa addr) const {
  if (!geometry_.contains(addr)) {
    throw Error(Errc::kAddressOutOfRange,
                "ppa (" + std::to_string(addr.block) + "," +
                    std::to_string(addr.page) + ")");
  }
}

void FlashArray::program_page(Ppa addr, std::span<const std::uint8_t> payload,
                              OobRecord oob) {
  check(addr);
  const auto i = geometry_.index_of(addr);
  if (state_[i] != PageState::kFree) {
    throw Error(Errc::kProgramOnProgrammedPage,
                "ppa (" + std::to_string(addr.block) + "," +
                    std::to_string(addr.page) + ")");
  }
  if (payload.size() > geometry_.page_size) {
    throw Error(Errc::kPayloadTooLarge,
                std::to_string(payload.size()) + " > " +
                    std::to_string(geometry_.page_size));
  }
  std::copy(payload.begin(), payload.end(),
            data_.begin() + static_cast<std::ptrdiff_t>(i * geometry_.page_size));
  lengths_[i] = static_cast<std::uint32_t>(payload.size());
  oob_[i] = std::move(oob);
  state_[i] = PageState::kProgrammed;
  ++programs_;
}

PageView FlashArray::read_page(Ppa addr) const {
  check(addr);
  const auto i = geometry_.index_of(addr);
  if (state_[i] != PageState::kProgrammed) {
    throw Error(Errc::kReadFreePage,
                "ppa (" + std::to_string(addr.block) + "," +
                    std::to_string(addr.page) + ")");
  }
  return PageView{
      std::span<const std::uint8_t>(data_).subspan(i * geometry_.page_size,
                                                   lengths_[i]),
      oob_[i]};
}

const OobRecord& FlashArray::read_oob(Ppa addr) const {
  return read_page(addr).oob;
}

void FlashArray::erase_block(std::uint32_t block) {
  if (block >= geometry_.blocks) {
    throw Error(Errc::kAddressOutOfRange, "block " + std::to_string(block));
  }
  const auto first = std::uint64_t{block} * geometry_.pages_per_block;
  for (std::uint64_t i = first; i < first + geometry_.pages_per_block; ++i) {
    state_[i] = PageState::kFree;
    lengths_[i] = 0;
    oob_[i] = OobRecord{};
  }
  ++erase_counts_[block];
  ++erases_;
}

PageState FlashArray::state(Ppa addr) const {
  check(addr);
  return state_[geometry_.index_of(addr)];
}

std::uint32_t FlashArray::erase_count(std::uint32_t block) const {
  if (block >= geometry_.blocks) {
    throw Error(Errc::kAddressOutOfRange, "block " + std::to_string(block));
  }
  return erase_counts_[block];
}

}  // namespace vssd
