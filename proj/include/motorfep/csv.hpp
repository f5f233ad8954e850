#pragma once

// CSV emitters for figure data. Each file opens with a comment carrying the
// config hash of the run that produced it.

#include <ostream>
#include <span>
#include <string>

#include "chaining.hpp"
#include "config.hpp"
#include "learner.hpp"

namespace motorfep {

inline void write_hash_line(std::ostream& os, const std::string& hash) {
  os << "# config_hash=" << hash << '\n';
}

inline void write_train_log(std::ostream& os, std::span<const EpisodeRecord> log,
                            const std::string& hash) {
  using detail::format_double;
  write_hash_line(os, hash);
  os << "episode,k,f_plus,f_minus,complexity,inaccuracy,i_w,sigma_search,sigma_kohonen\n";
  for (const auto& r : log)
    os << r.episode << ',' << r.k << ',' << format_double(r.f_plus) << ',' << format_double(r.f_minus)
       << ',' << format_double(r.complexity) << ',' << format_double(r.inaccuracy) << ',' << r.i_w
       << ',' << format_double(r.sigma_search) << ',' << format_double(r.sigma_kohonen) << '\n';
}

inline void write_chain_result(std::ostream& os, const ChainResult& res,
                               const ClassFilterSet& filters, const std::string& hash) {
  using detail::format_double;
  write_hash_line(os, hash);
  os << "slot,k,efe\n";
  for (std::size_t m = 0; m < res.chosen.size(); ++m)
    os << m << ',' << res.chosen[m] << ',' << format_double(res.efe_tables[m][res.chosen[m]]) << '\n';
  os << "# final posterior\n";
  for (std::size_t i = 0; i < filters.size(); ++i)
    os << "# q(" << filters.labels()[i] << ")=" << format_double(res.final_q[i]) << '\n';
  os << "# final_complexity=" << format_double(res.final_complexity) << '\n';
}

inline void write_comparison(std::ostream& os, std::span<const ComparisonRow> rows,
                             const std::string& hash) {
  write_hash_line(os, hash);
  os << "size,type,letter,seed,final_complexity\n";
  for (const auto& r : rows)
    os << r.size << ',' << to_string(r.kind) << ',' << r.letter << ',' << r.seed << ','
       << detail::format_double(r.final_complexity) << '\n';
}

inline void write_beta_sweep(std::ostream& os, std::span<const BetaSweepRow> rows,
                             const std::string& hash) {
  write_hash_line(os, hash);
  os << "beta,mean_distance\n";
  for (const auto& r : rows)
    os << detail::format_double(r.beta) << ',' << detail::format_double(r.mean_distance) << '\n';
}

}  // namespace motorfep
