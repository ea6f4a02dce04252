#pragma once

#include <filesystem>
#include <map>
#include <string_view>
#include <tuple>
#include <utility>
#include <vector>

namespace afc {

enum class Line { D1, D2 };

/// Pair of excited-state hyperfine levels (F'_a, F'_b) with a < b.
using LevelPair = std::pair<int, int>;

/// One hyperfine component F -> F' of a D line.
///
/// Einstein coefficients are per hyperfine transition. The B coefficients
/// refer to spectral energy density per unit angular frequency, so that a
/// Lorentzian line shape g_L normalised over angular frequency gives the
/// cross-section sigma(w) = B_abs * hbar * w / c * g_L(w - w0).
struct TransitionData {
  int lower = 0;  ///< ground F
  int upper = 0;  ///< excited F'
  Line line = Line::D1;
  double relative_strength = 0.0;      ///< S_FF'
  double einstein_a = 0.0;             ///< partial decay rate F' -> F, 1/s
  double einstein_b_absorption = 0.0;  ///< m^3 J^-1 s^-2
  double einstein_b_emission = 0.0;    ///< m^3 J^-1 s^-2
  double resonant_frequency = 0.0;     ///< absolute, rad/s
  double linewidth = 0.0;              ///< natural FWHM of F', rad/s

  int lower_degeneracy() const { return 2 * lower + 1; }
  int upper_degeneracy() const { return 2 * upper + 1; }
  bool allowed() const { return einstein_a > 0.0; }
};

/// Two-branch Clausius-Clapeyron (Antoine form, C = 0) vapour-pressure fit,
/// log10(p / atm) = a - b / T.
struct VaporPressureModel {
  double solid_a = 0.0;
  double solid_b = 0.0;
  double liquid_a = 0.0;
  double liquid_b = 0.0;
  double melting_point = 0.0;
  double valid_min = 0.0;
  double valid_max = 0.0;
};

/// Rb-87 D-line level structure. Frequencies in rad/s, lengths in m.
struct LevelScheme {
  int schema_version = 0;
  double ground_splitting = 0.0;
  std::map<LevelPair, double> d1_splittings;  ///< adjacent pairs only
  std::map<LevelPair, double> d2_splittings;  ///< adjacent pairs only
  double d1_wavelength = 0.0;
  double d2_wavelength = 0.0;
  double d1_linewidth = 0.0;
  double d2_linewidth = 0.0;
  double atomic_mass = 0.0;
  std::map<std::tuple<Line, int, int>, double> strengths;
  VaporPressureModel vapor;

  /// Splitting between F'_a and F'_b (a < b), summing adjacent intervals.
  double excited_splitting(Line line, int fa, int fb) const;
  std::vector<int> excited_levels(Line line) const;
  double linewidth(Line line) const;
  double wavelength(Line line) const;
  /// Fine-structure centre frequency 2 pi c / lambda.
  double line_frequency(Line line) const;
  /// Hyperfine shift of ground F from the centre of gravity.
  double ground_level_offset(int f) const;
  /// Hyperfine shift of excited F' from the centre of gravity.
  double excited_level_offset(Line line, int fp) const;
  double transition_frequency(Line line, int f, int fp) const;
  /// Throws DomainError for levels that do not exist. Forbidden components
  /// are returned with zero strength.
  TransitionData transition(Line line, int f, int fp) const;
};

/// Built-in Rb-87 data (parsed once from the bundled data file).
const LevelScheme& rb87_level_scheme();
LevelScheme load_level_scheme(const std::filesystem::path& path);
LevelScheme parse_level_scheme(std::string_view text, std::string_view source = "<memory>");
/// Raw text of the bundled data file.
std::string_view bundled_rb87_data();

/// Comb tooth spacing Delta(a,b) / (n + 1) on the D2 line, rad/s.
double comb_spacing(const LevelScheme& scheme, LevelPair pair, int n);
/// Rephasing time 2 pi / spacing.
double echo_time(double spacing);

/// One-dimensional thermal velocity spread sqrt(k_B T / m).
double thermal_velocity_sigma(double temperature, const LevelScheme& scheme);
double maxwell_boltzmann_density(double temperature, double velocity, const LevelScheme& scheme);
/// Doppler FWHM in Hz for a transition at `wavelength`.
double doppler_fwhm(double temperature, double wavelength, const LevelScheme& scheme);

double vapor_pressure(double temperature, const LevelScheme& scheme);
/// Atomic number density of saturated vapour (1/m^3), ideal gas.
double vapor_number_density(double temperature, const LevelScheme& scheme);

/// Comb prepared in F=2 and probed on the D2 line.
struct CombDesign {
  LevelPair hyperfine_pair{2, 3};
  int divisor_n = 1;
  double spacing = 0.0;     ///< rad/s, probe comb spacing
  double echo_time = 0.0;   ///< s
  double center_velocity = 0.0;
  double velocity_step = 0.0;  ///< m/s between neighbouring classes
  int first_index = 0;         ///< class index of velocity_classes.front()
  std::vector<double> velocity_classes;
};

/// Classes v = center_velocity + k * dv for k in [min_index, max_index],
/// with dv chosen so the D2 F=2 -> F'=3 Doppler shift per step equals the
/// comb spacing.
CombDesign design_comb(const LevelScheme& scheme, LevelPair pair, int n, int min_index = -1,
                       int max_index = 1, double center_velocity = 0.0);

}  // namespace afc
