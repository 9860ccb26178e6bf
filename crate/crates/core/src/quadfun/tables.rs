// Gauss-Kronrod abscissae and weights on [-1, 1], positive half, descending.
// Gauss nodes sit at the odd indices of each XGK table.

pub(crate) const XGK15: [f64; 8] = [
    9.91455371120812639207e-1,
    9.49107912342758524526e-1,
    8.6486442335976907279e-1,
    7.41531185599394439864e-1,
    5.86087235467691130294e-1,
    4.05845151377397166907e-1,
    2.07784955007898467601e-1,
    0.0,
];
pub(crate) const WGK15: [f64; 8] = [
    0.0229353220105292249637,
    0.0630920926299785532907,
    0.10479001032225018384,
    0.140653259715525918745,
    0.169004726639267902827,
    0.190350578064785409913,
    0.204432940075298892414,
    0.209482141084727828013,
];
pub(crate) const WG7: [f64; 4] = [
    0.129484966168869693271,
    0.279705391489276667901,
    0.38183005050511894495,
    0.417959183673469387755,
];
pub(crate) const XGK21: [f64; 11] = [
    9.95657163025808080736e-1,
    9.73906528517171720078e-1,
    9.30157491355708226001e-1,
    8.65063366688984510732e-1,
    7.80817726586416897064e-1,
    6.79409568299024406234e-1,
    5.62757134668604683339e-1,
    4.33395394129247190799e-1,
    2.94392862701460198131e-1,
    1.48874338981631210885e-1,
    0.0,
];
pub(crate) const WGK21: [f64; 11] = [
    0.0116946388673718742781,
    0.0325581623079647274788,
    0.0547558965743519960314,
    0.075039674810919952767,
    0.0931254545836976055351,
    0.109387158802297641899,
    0.123491976262065851078,
    0.134709217311473325928,
    0.142775938577060080797,
    0.147739104901338491375,
    0.149445554002916905665,
];
pub(crate) const WG10: [f64; 5] = [
    0.0666713443086881375936,
    0.149451349150580593146,
    0.219086362515982043996,
    0.269266719309996355091,
    0.295524224714752870174,
];
pub(crate) const XGK31: [f64; 16] = [
    9.98002298693397060285e-1,
    9.8799251802048542849e-1,
    9.67739075679139134257e-1,
    9.37273392400705904308e-1,
    8.97264532344081900883e-1,
    8.48206583410427216201e-1,
    7.90418501442465932968e-1,
    7.24417731360170047416e-1,
    6.50996741297416970534e-1,
    5.70972172608538847537e-1,
    4.85081863640239680694e-1,
    3.94151347077563369897e-1,
    2.99180007153168812167e-1,
    2.01194093997434522301e-1,
    1.01142066918717499027e-1,
    0.0,
];
pub(crate) const WGK31: [f64; 16] = [
    0.00537747987292334898779,
    0.0150079473293161225384,
    0.0254608473267153201869,
    0.035346360791375846222,
    0.0445897513247648766082,
    0.0534815246909280872653,
    0.0620095678006706402851,
    0.0698541213187282587095,
    0.0768496807577203788944,
    0.0830805028231330210383,
    0.0885644430562117706473,
    0.0931265981708253212255,
    0.0966427269836236785052,
    0.0991735987217919593324,
    0.100769845523875595045,
    0.101330007014791549017,
];
pub(crate) const WG15: [f64; 8] = [
    0.0307532419961172683546,
    0.0703660474881081247093,
    0.107159220467171935012,
    0.139570677926154314448,
    0.166269205816993933553,
    0.186161000015562211027,
    0.198431485327111576456,
    0.202578241925561272881,
];
pub(crate) const XGK41: [f64; 21] = [
    9.98859031588277663838e-1,
    9.93128599185094924786e-1,
    9.81507877450250259193e-1,
    9.63971927277913791268e-1,
    9.4082263383175475352e-1,
    9.12234428251325905868e-1,
    8.78276811252281976077e-1,
    8.39116971822218823395e-1,
    7.95041428837551198351e-1,
    7.46331906460150792614e-1,
    6.93237656334751384805e-1,
    6.36053680726515025453e-1,
    5.75140446819710315343e-1,
    5.10867001950827098004e-1,
    4.435931752387251032e-1,
    3.73706088715419560673e-1,
    3.01627868114913004321e-1,
    2.2778585114164507808e-1,
    1.52605465240922675505e-1,
    7.65265211334973337546e-2,
    0.0,
];
pub(crate) const WGK41: [f64; 21] = [
    0.00307358371852053150122,
    0.00860026985564294219866,
    0.0146261692569712529838,
    0.020388373461266523598,
    0.0258821336049511588345,
    0.0312873067770327989585,
    0.0366001697582007980306,
    0.0416688733279736862638,
    0.0464348218674976747202,
    0.0509445739237286919327,
    0.0551951053482859947448,
    0.059111400880639572375,
    0.0626532375547811680259,
    0.0658345971336184221116,
    0.0686486729285216193456,
    0.0710544235534440683058,
    0.0730306903327866674952,
    0.0745828754004991889866,
    0.0757044976845566746595,
    0.0763778676720807367055,
    0.076600711917999656445,
];
pub(crate) const WG20: [f64; 10] = [
    0.0176140071391521183119,
    0.040601429800386941331,
    0.0626720483341090635695,
    0.0832767415767047487248,
    0.101930119817240435037,
    0.118194531961518417312,
    0.131688638449176626898,
    0.142096109318382051329,
    0.149172986472603746788,
    0.152753387130725850698,
];
pub(crate) const XGK51: [f64; 26] = [
    9.99262104992609834193e-1,
    9.95556969790498097909e-1,
    9.88035794534077247637e-1,
    9.76663921459517511498e-1,
    9.61614986425842512418e-1,
    9.42974571228974339414e-1,
    9.20747115281701561746e-1,
    8.94991997878275368851e-1,
    8.65847065293275595449e-1,
    8.33442628760834001421e-1,
    7.9787379799850005941e-1,
    7.59259263037357630577e-1,
    7.17766406813084388187e-1,
    6.73566368473468364485e-1,
    6.26810099010317412788e-1,
    5.77662930241222967724e-1,
    5.263252843347191826e-1,
    4.73002731445714960522e-1,
    4.17885382193037748852e-1,
    3.61172305809387837736e-1,
    3.03089538931107830167e-1,
    2.43866883720988432045e-1,
    1.83718939421048892016e-1,
    1.22864692610710396387e-1,
    6.15444830056850788865e-2,
    0.0,
];
pub(crate) const WGK51: [f64; 26] = [
    0.00198738389233031592651,
    0.00556193213535671375804,
    0.00947397338617415160721,
    0.0132362291955716748137,
    0.0168478177091282982315,
    0.0204353711458828354566,
    0.0240099456069532162201,
    0.0274753175878517378029,
    0.0307923001673874888911,
    0.0340021302743293378367,
    0.0371162714834155435603,
    0.0400838255040323820748,
    0.0428728450201700494769,
    0.0455029130499217889099,
    0.0479825371388367139064,
    0.0502776790807156719633,
    0.0523628858064074758644,
    0.0542511298885454901445,
    0.0559508112204123173082,
    0.0574371163615678328536,
    0.058689680022394207962,
    0.0597203403241740599791,
    0.0605394553760458629454,
    0.0611285097170530483059,
    0.0614711898714253166615,
    0.0615808180678329350788,
];
pub(crate) const WG25: [f64; 13] = [
    0.0113937985010262879479,
    0.0263549866150321372619,
    0.0409391567013063126556,
    0.0549046959758351919259,
    0.0680383338123569172072,
    0.0801407003350010180132,
    0.0910282619829636498115,
    0.100535949067050644202,
    0.108519624474263653116,
    0.114858259145711648339,
    0.119455763535784772228,
    0.122242442990310041689,
    0.123176053726715451204,
];
pub(crate) const XGK61: [f64; 31] = [
    9.99484410050490637571e-1,
    9.96893484074649540272e-1,
    9.91630996870404594859e-1,
    9.8366812327974720997e-1,
    9.73116322501126268375e-1,
    9.60021864968307512217e-1,
    9.44374444748559979416e-1,
    9.26200047429274325879e-1,
    9.05573307699907798547e-1,
    8.82560535792052681543e-1,
    8.57205233546061098959e-1,
    8.29565762382768397443e-1,
    7.99727835821839083014e-1,
    7.67777432104826194918e-1,
    7.33790062453226804726e-1,
    6.97850494793315796932e-1,
    6.6006106412662696137e-1,
    6.2052618298924286114e-1,
    5.79345235826361691756e-1,
    5.36624148142019899264e-1,
    4.92480467861778574994e-1,
    4.47033769538089176781e-1,
    4.00401254830394392535e-1,
    3.52704725530878113471e-1,
    3.04073202273625077373e-1,
    2.5463692616788984644e-1,
    2.04525116682309891439e-1,
    1.53869913608583546964e-1,
    1.02806937966737030147e-1,
    5.1471842555317695833e-2,
    -5.55768525467591085469e-50,
];
pub(crate) const WGK61: [f64; 31] = [
    0.00138901369867700762455,
    0.00389046112709988405127,
    0.00663070391593129217332,
    0.00927327965951776342844,
    0.0118230152534963417422,
    0.0143697295070458048125,
    0.0169208891890532726276,
    0.0194141411939423811734,
    0.0218280358216091922972,
    0.0241911620780806013657,
    0.0265099548823331016106,
    0.028754048765041292844,
    0.0309072575623877624729,
    0.0329814470574837260318,
    0.0349793380280600241375,
    0.0368823646518212292239,
    0.0386789456247275929503,
    0.040374538951535959112,
    0.0419698102151642461471,
    0.0434525397013560693168,
    0.0448148001331626631924,
    0.0460592382710069881163,
    0.0471855465692991539453,
    0.0481858617570871291408,
    0.0490554345550297788875,
    0.0497956834270742063578,
    0.0504059214027823468409,
    0.0508817958987496064923,
    0.0512215478492587721707,
    0.0514261285374590259339,
    0.0514947294294515675583,
];
pub(crate) const WG30: [f64; 15] = [
    0.00796819249616660561547,
    0.0184664683110909591423,
    0.0287847078833233693497,
    0.0387991925696270495968,
    0.0484026728305940529029,
    0.0574931562176190664817,
    0.0659742298821804951281,
    0.0737559747377052062682,
    0.0807558952294202153547,
    0.0868997872010829798024,
    0.0921225222377861287176,
    0.0963687371746442596395,
    0.0995934205867952670628,
    0.101762389748405504596,
    0.102852652893558840341,
];
