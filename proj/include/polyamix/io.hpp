#pragma once

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "polyamix/completion.hpp"
#include "polyamix/gibbs.hpp"

namespace polyamix {

// Malformed or unrecognised interchange file.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr const char* kFormatVersion = "1";
inline constexpr const char* kModelTag = "normal-nig-mdp";

// Plain text, one value per line; blank lines and '#' comments ignored.
std::vector<double> read_data_text(std::istream& in);

// Newline-delimited JSON: one header record carrying the resolved config,
// seed, data, n and T, then one record per retained draw.
struct DrawsFile {
  std::string source;  // dataset name or input path
  std::vector<double> data;
  ModelConfig config;
  std::vector<PosteriorDraw> draws;
};

void write_draws(std::ostream& out, const DrawsFile& file);
DrawsFile read_draws(std::istream& in);

struct MixturesFile {
  std::string source;
  std::vector<double> data;
  ModelConfig model;
  CompletionConfig completion;
  std::vector<MixtureDensity> mixtures;
};

void write_mixtures(std::ostream& out, const MixturesFile& file);
MixturesFile read_mixtures(std::istream& in);

enum class FileKind { draws, mixtures };

// Kind of an interchange file, judged from its header line.
FileKind peek_kind(const std::string& header_line);

}  // namespace polyamix
