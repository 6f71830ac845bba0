#include "lift/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "lift/errors.hpp"
#include "lift/rng.hpp"

namespace lift {

namespace fs = std::filesystem;

std::string to_string(Complexion c) {
  switch (c) {
    case Complexion::PaleFair: return "pale-fair";
    case Complexion::FairOlive: return "fair-olive";
    case Complexion::OliveDark: return "olive-dark";
  }
  return "";
}

std::string to_string(AgeBin a) {
  switch (a) {
    case AgeBin::Young: return "young";
    case AgeBin::MiddleAged: return "middle-aged";
    case AgeBin::Elderly: return "elderly";
  }
  return "";
}

std::string to_string(Gender g) {
  return g == Gender::Male ? "male" : "female";
}

Complexion complexion_from_string(const std::string& s) {
  if (s == "pale-fair") return Complexion::PaleFair;
  if (s == "fair-olive") return Complexion::FairOlive;
  if (s == "olive-dark") return Complexion::OliveDark;
  throw MalformedRow("unknown complexion: " + s);
}

AgeBin age_bin_from_string(const std::string& s) {
  if (s == "young") return AgeBin::Young;
  if (s == "middle-aged") return AgeBin::MiddleAged;
  if (s == "elderly") return AgeBin::Elderly;
  throw MalformedRow("unknown age bin: " + s);
}

Gender gender_from_string(const std::string& s) {
  if (s == "male") return Gender::Male;
  if (s == "female") return Gender::Female;
  throw MalformedRow("unknown gender: " + s);
}

std::vector<std::string> Dataset::person_ids() const {
  std::vector<std::string> ids;
  std::set<std::string> seen;
  for (const auto& seq : sequences) {
    if (seen.insert(seq.person_id).second) ids.push_back(seq.person_id);
  }
  return ids;
}

std::size_t Dataset::frame_count() const {
  std::size_t n = 0;
  for (const auto& seq : sequences) n += seq.frames.size();
  return n;
}

void Dataset::validate() const {
  std::set<std::string> seq_ids;
  for (const auto& seq : sequences) {
    if (!seq_ids.insert(seq.sequence_id).second) {
      throw MalformedRow("duplicate sequence id: " + seq.sequence_id);
    }
    if (seq.frames.empty()) {
      throw MalformedRow("sequence has no frames: " + seq.sequence_id);
    }
    if (seq.vas < 0 || seq.vas > 10) {
      throw RangeViolation("vas out of [0,10] for " + seq.sequence_id);
    }
    if (seq.opi < 0 || seq.opi > 5) {
      throw RangeViolation("opi out of [0,5] for " + seq.sequence_id);
    }
    if (profiles.find(seq.person_id) == profiles.end()) {
      throw MissingProfile("no profile for person " + seq.person_id);
    }
    for (std::size_t i = 0; i < seq.frames.size(); ++i) {
      const auto& f = seq.frames[i];
      if (f.person_id != seq.person_id || f.sequence_id != seq.sequence_id) {
        throw MalformedRow("frame linkage mismatch in " + seq.sequence_id);
      }
      if (f.frame_index != static_cast<int>(i)) {
        throw MalformedRow("frame indices not consecutive from 0 in " + seq.sequence_id);
      }
      if (f.landmarks.size() != kLandmarkDim) {
        throw MalformedRow("landmark vector must have 132 entries in " + seq.sequence_id);
      }
      if (!f.landmarks.allFinite()) {
        throw MalformedRow("non-finite landmark in " + seq.sequence_id);
      }
      if (f.au_intensities) {
        const auto& au = *f.au_intensities;
        for (int k = 0; k < 5; ++k) {
          if (au[k] < 0 || au[k] > 5) throw RangeViolation("AU intensity out of [0,5]");
        }
        if (au[5] != 0 && au[5] != 1) throw RangeViolation("AU43 must be 0 or 1");
      }
    }
  }
}

Eigen::VectorXd encode_personal(const PersonProfile& profile) {
  return encode_personal(profile, PersonalFeatureSet{});
}

Eigen::VectorXd encode_personal(const PersonProfile& profile,
                                const PersonalFeatureSet& features) {
  Eigen::VectorXd v = Eigen::VectorXd::Zero(features.dim());
  int off = 0;
  if (features.complexion) {
    v[off + static_cast<int>(profile.complexion)] = 1.0;
    off += 3;
  }
  if (features.age) {
    v[off + static_cast<int>(profile.age_bin)] = 1.0;
    off += 3;
  }
  if (features.gender) {
    v[off + static_cast<int>(profile.gender)] = 1.0;
  }
  return v;
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (const char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

double parse_double(const std::string& s, const std::string& context) {
  double v = 0.0;
  const auto* begin = s.data();
  const auto* end = s.data() + s.size();
  const auto res = std::from_chars(begin, end, v);
  if (res.ec != std::errc() || res.ptr != end) {
    throw MalformedRow("bad number '" + s + "' in " + context);
  }
  return v;
}

int parse_int(const std::string& s, const std::string& context) {
  int v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw MalformedRow("bad integer '" + s + "' in " + context);
  }
  return v;
}

std::vector<std::string> read_lines(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw MalformedRow("cannot open " + path.string());
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && !(line.size() == 1 && line[0] == '\r')) lines.push_back(line);
  }
  if (lines.empty()) throw MalformedRow("empty file: " + path.string());
  return lines;
}

std::string fmt_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

Dataset load_dataset(const std::string& dir) {
  const fs::path root(dir);
  Dataset ds;

  for (const auto& line : read_lines(root / "profiles.csv")) {
    const auto cells = split_csv_line(line);
    if (cells[0] == "person_id") continue;  // header
    if (cells.size() != 4) throw MalformedRow("profiles.csv expects 4 columns");
    PersonProfile p;
    p.person_id = cells[0];
    p.complexion = complexion_from_string(cells[1]);
    p.age_bin = age_bin_from_string(cells[2]);
    p.gender = gender_from_string(cells[3]);
    if (!ds.profiles.emplace(p.person_id, p).second) {
      throw MalformedRow("duplicate profile for person " + p.person_id);
    }
  }

  std::map<std::string, std::size_t> seq_index;
  for (const auto& line : read_lines(root / "sequences.csv")) {
    const auto cells = split_csv_line(line);
    if (cells[0] == "sequence_id") continue;
    if (cells.size() != 4) throw MalformedRow("sequences.csv expects 4 columns");
    SequenceRecord seq;
    seq.sequence_id = cells[0];
    seq.person_id = cells[1];
    seq.vas = parse_int(cells[2], "sequences.csv vas");
    seq.opi = parse_int(cells[3], "sequences.csv opi");
    if (seq.vas < 0 || seq.vas > 10) throw RangeViolation("vas out of [0,10]: " + cells[2]);
    if (seq.opi < 0 || seq.opi > 5) throw RangeViolation("opi out of [0,5]: " + cells[3]);
    if (ds.profiles.find(seq.person_id) == ds.profiles.end()) {
      throw MissingProfile("sequence " + seq.sequence_id + " references unknown person " +
                           seq.person_id);
    }
    if (!seq_index.emplace(seq.sequence_id, ds.sequences.size()).second) {
      throw MalformedRow("duplicate sequence id: " + seq.sequence_id);
    }
    ds.sequences.push_back(std::move(seq));
  }

  for (const auto& line : read_lines(root / "frames.csv")) {
    const auto cells = split_csv_line(line);
    if (cells[0] == "sequence_id") continue;
    const std::size_t ncols = cells.size();
    const bool with_au = ncols == 2 + kLandmarkDim + 6;
    if (!with_au && ncols != 2 + kLandmarkDim) {
      throw MalformedRow("frames.csv row has " + std::to_string(ncols) + " columns");
    }
    const auto it = seq_index.find(cells[0]);
    if (it == seq_index.end()) {
      throw MalformedRow("frames.csv references unknown sequence " + cells[0]);
    }
    SequenceRecord& seq = ds.sequences[it->second];
    FrameSample frame;
    frame.sequence_id = cells[0];
    frame.person_id = seq.person_id;
    frame.frame_index = parse_int(cells[1], "frames.csv frame_index");
    frame.landmarks.resize(kLandmarkDim);
    for (int i = 0; i < kLandmarkDim; ++i) {
      frame.landmarks[i] = parse_double(cells[2 + i], "frames.csv landmark");
    }
    if (with_au) {
      AuIntensities au{};
      for (int k = 0; k < 6; ++k) {
        au[k] = parse_int(cells[2 + kLandmarkDim + k], "frames.csv AU");
      }
      frame.au_intensities = au;
    }
    seq.frames.push_back(std::move(frame));
  }

  for (auto& seq : ds.sequences) {
    std::sort(seq.frames.begin(), seq.frames.end(),
              [](const FrameSample& a, const FrameSample& b) {
                return a.frame_index < b.frame_index;
              });
  }
  ds.validate();
  return ds;
}

void save_dataset(const Dataset& ds, const std::string& dir) {
  const fs::path root(dir);
  fs::create_directories(root);

  {
    std::ofstream out(root / "profiles.csv");
    out << "person_id,complexion,age_bin,gender\n";
    for (const auto& [id, p] : ds.profiles) {
      out << id << ',' << to_string(p.complexion) << ',' << to_string(p.age_bin) << ','
          << to_string(p.gender) << '\n';
    }
  }
  {
    std::ofstream out(root / "sequences.csv");
    out << "sequence_id,person_id,vas,opi\n";
    for (const auto& seq : ds.sequences) {
      out << seq.sequence_id << ',' << seq.person_id << ',' << seq.vas << ',' << seq.opi
          << '\n';
    }
  }
  {
    std::ofstream out(root / "frames.csv");
    out << "sequence_id,frame_index";
    for (int i = 0; i < kNumLandmarks; ++i) out << ",x" << i << ",y" << i;
    const bool with_au = !ds.sequences.empty() && !ds.sequences.front().frames.empty() &&
                         ds.sequences.front().frames.front().au_intensities.has_value();
    if (with_au) out << ",au4,au6,au7,au9,au10,au43";
    out << '\n';
    for (const auto& seq : ds.sequences) {
      for (const auto& f : seq.frames) {
        out << f.sequence_id << ',' << f.frame_index;
        for (int i = 0; i < kLandmarkDim; ++i) out << ',' << fmt_double(f.landmarks[i]);
        if (f.au_intensities) {
          for (const int a : *f.au_intensities) out << ',' << a;
        }
        out << '\n';
      }
    }
  }
}

FoldPlan split_folds(const Dataset& ds, int k, std::uint64_t seed) {
  if (k < 2) throw BadConfig("fold count must be at least 2");
  std::vector<std::string> persons = ds.person_ids();
  if (static_cast<int>(persons.size()) < k) {
    throw TooFewPersons("cannot split " + std::to_string(persons.size()) +
                        " persons into " + std::to_string(k) + " folds");
  }
  Rng rng(derive_seed(seed, "fold-split"));
  rng.shuffle(persons);

  FoldPlan plan;
  plan.seed = seed;
  plan.folds.resize(k);
  const int n = static_cast<int>(persons.size());
  const int base = n / k;
  const int extra = n % k;  // one extra person to each of the earliest folds
  int pos = 0;
  for (int f = 0; f < k; ++f) {
    const int size = base + (f < extra ? 1 : 0);
    for (int i = 0; i < size; ++i) plan.folds[f].push_back(persons[pos++]);
  }
  return plan;
}

}  // namespace lift
