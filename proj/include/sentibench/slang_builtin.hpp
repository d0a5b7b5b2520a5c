#pragma once

#include <sstream>
#include <string_view>

#include "sentibench/preprocess.hpp"

namespace sentibench {

// Contents of data/slang_id.tsv, embedded so the CLI works without a
// checkout. A unit test keeps the two copies in sync.
inline constexpr std::string_view kBuiltinSlangTsv = R"SLANG(# Indonesian slang -> standard form, one pair per line, tab separated.
# Illustrative starter dictionary for marketplace review text; extend or
# replace it via the --slang flag. Values are final forms and never appear
# as keys, which keeps the preprocessing pipeline idempotent.
bgt	banget
bngt	banget
gak	tidak
ga	tidak
gk	tidak
nggak	tidak
ngga	tidak
tdk	tidak
enggak	tidak
yg	yang
dgn	dengan
dg	dengan
utk	untuk
krn	karena
karna	karena
jg	juga
jga	juga
sdh	sudah
udh	sudah
udah	sudah
blm	belum
blum	belum
belom	belum
bgs	bagus
bgus	bagus
mantab	mantap
mantul	mantap
jos	mantap
joss	mantap
sip	mantap
siip	mantap
oke	ok
tp	tapi
tpi	tapi
sy	saya
km	kamu
cpt	cepat
lmyn	lumayan
jlk	jelek
murmer	murah
ori	asli
kw	palsu
thx	terimakasih
makasih	terimakasih
mksh	terimakasih
trims	terimakasih
sm	sama
dr	dari
klo	kalau
kalo	kalau
kl	kalau
hrs	harus
bs	bisa
bsa	bisa
sgt	sangat
lg	lagi
lgi	lagi
aja	saja
aj	saja
trs	terus
trus	terus
dpt	dapat
dapet	dapat
sampe	sampai
nyampe	sampai
brp	berapa
hr	hari
bln	bulan
pke	pakai
pake	pakai
bli	beli
kcw	kecewa
lemot	lambat
lelet	lambat
dtg	datang
kmrn	kemarin
kemaren	kemarin
ckp	cukup
hrg	harga
murce	murah
mhl	mahal
rekomended	rekomendasi
recomended	rekomendasi
)SLANG";

// Parsed form of the bundled dictionary.
inline const SlangDict& builtin_slang_dict() {
  static const SlangDict dict = [] {
    std::istringstream in{std::string(kBuiltinSlangTsv)};
    return parse_slang_dict(in, "builtin");
  }();
  return dict;
}

}  // namespace sentibench
