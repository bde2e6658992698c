#pragma once

#include <map>
#include <string>
#include <vector>

#include "kslab/numerics.hpp"
#include "kslab/odekernel.hpp"

// Catalog of the expansion profiles entering the two-bubble inner ansatz:
// the leading family T_{2,0} ... hat T_{4,2}, the modulation family
// S_{m,n,j}, and the soliton-interaction family mT_{i,k}.  Every profile is
// solved on the shared radial grid and shipped with a certificate of its
// far-field behaviour.

namespace kslab {

// Expected far field of one scalar profile: either a decay bound
// |f| <~ r^power ln^log_power r (bound_only), or a leading coefficient
// f ~ coefficient r^power ln^log_power r, optionally together with the
// next coefficient one log power down.
struct TailTag {
    double coefficient = 0.0;
    double power = 0.0;
    int log_power = 0;
    double coefficient2 = 0.0;
    bool has_second = false;
    bool bound_only = false;
    double tolerance = 0.02;
};

TailTag bound_tail(double power, double tolerance = 0.3, int log_power = 0);
TailTag coeff_tail(double coefficient, double power, int log_power = 0,
                   double tolerance = 0.02);
TailTag coeff_tail2(double coefficient, double coefficient2, double power,
                    int log_power, double tolerance = 0.02);

struct TailCertificate {
    double fitted = 0.0;
    double expected = 0.0;  // coefficient; in bound mode the exponent bound
    double fitted2 = 0.0;
    double expected2 = 0.0;
    double tolerance = 0.0;
    bool bound_only = false;
    bool checked_second = false;
    bool pass = false;
};

// Fit the far field of f over the window against its tag.  Bound mode divides
// out the tagged log factor, fits a pure power, and passes when the fitted
// exponent is at most power+tolerance; coefficient mode solves a small
// least-squares ladder in ln r at the pinned exponent and compares
// coefficients to tolerance relative accuracy.
TailCertificate certify_tail(const RadialProfile& f, const TailTag& tag,
                             const FitWindow& window = FitWindow{1e3, 1e4});

struct ProfileEntry {
    HarmonicPair pair;     // density psi and potential omega
    RadialProfile source;  // right-hand side the pair solves
    TailTag psi_tail, omega_tail;
};

// Name-keyed profile container; immutable once sealed so concurrent readers
// never race a builder.
class ProfileCatalog {
  public:
    void insert(const std::string& name, ProfileEntry entry);
    void seal();
    bool sealed() const { return sealed_; }
    bool contains(const std::string& name) const;
    const ProfileEntry& at(const std::string& name) const;
    std::vector<std::string> names() const;  // sorted
    std::size_t size() const { return entries_.size(); }

  private:
    std::map<std::string, ProfileEntry> entries_;
    bool sealed_ = false;
};

// Interaction strengths of the two-soliton decomposition at separation 2a
// and scale nu.
double gamma2_of(double ax, double nu);
double gamma3_of(double ax, double nu);

// Leading tail profiles at eigenvalue index i in {0, 1}:
// T20 T22 T31 T33 T40 T42 T44 hatT2 hatT40 hatT42.
ProfileCatalog build_leading(int i);

// Modulation profiles S_{m,n,j} at index i, soliton position (ax, 0), scale
// nu, inner matching constant L_in, and shifted-eigenvalue iterate
// lambda_tilde:
// S111 S210 S212 S220 S222 S301 S303 S311 S313 S400 S402 S404 S402p.
ProfileCatalog build_subleading(int i, double ax, double nu, double L_in,
                                double lambda_tilde = 0.0);

// Soliton-interaction profiles mT_{i,k} of the outer two-bubble expansion:
// mT20 mT21 mT22 mT33 mT40 mT41 mT42 mT43 mT44.
ProfileCatalog build_multisoliton_profiles(double ax, double nu);

}  // namespace kslab
