#include "edgepower/csv.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>

#include "edgepower/policy.hpp"

namespace edgepower::csv {

std::string number(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  if (value == 0.0) return "0";  // folds -0
  char buffer[64];
  std::snprintf(buffer, sizeof buffer, "%.12g", value);
  return buffer;
}

Writer::Writer(std::initializer_list<std::string_view> header) {
  for (auto h : header) cell(h);
  end_row();
}

Writer::Writer(const std::vector<std::string>& header) {
  for (const auto& h : header) cell(h);
  end_row();
}

Writer& Writer::cell(std::string_view text) {
  if (row_started_) out_ << ',';
  out_ << text;
  row_started_ = true;
  return *this;
}

Writer& Writer::cell(double value) { return cell(std::string_view(number(value))); }

Writer& Writer::cell(std::uint64_t value) { return cell(std::string_view(std::to_string(value))); }

Writer& Writer::cell(long long value) { return cell(std::string_view(std::to_string(value))); }

void Writer::end_row() {
  out_ << '\n';
  row_started_ = false;
}

}  // namespace edgepower::csv

namespace edgepower {

void write_qtable_csv(std::ostream& out, const QTable& table) {
  csv::Writer w({"state", "demand_level", "action", "value"});
  for (auto state : kAllPowerStates) {
    for (std::size_t level = 0; level < kDemandLevelCount; ++level) {
      const auto lvl = static_cast<DemandLevel>(level);
      for (auto action : legal_actions(state)) {
        w.cell(label(state)).cell(to_string(lvl)).cell(label(action));
        w.cell(table.value(q_key(state, lvl), static_cast<std::size_t>(action)));
        w.end_row();
      }
    }
  }
  out << w.str();
}

}  // namespace edgepower
