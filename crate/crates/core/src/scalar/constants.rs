//! Decimal expansions of the default constants, truncated (not rounded) after 1010
//! fractional digits.

pub(crate) const PI: &str = concat!(
    "3.141592653589793238462643383279502884197169399375105820974944592307816406286208",
    "99862803482534211706798214808651328230664709384460955058223172535940812848111745",
    "02841027019385211055596446229489549303819644288109756659334461284756482337867831",
    "65271201909145648566923460348610454326648213393607260249141273724587006606315588",
    "17488152092096282925409171536436789259036001133053054882046652138414695194151160",
    "94330572703657595919530921861173819326117931051185480744623799627495673518857527",
    "24891227938183011949129833673362440656643086021394946395224737190702179860943702",
    "77053921717629317675238467481846766940513200056812714526356082778577134275778960",
    "91736371787214684409012249534301465495853710507922796892589235420199561121290219",
    "60864034418159813629774771309960518707211349999998372978049951059731732816096318",
    "59502445945534690830264252230825334468503526193118817101000313783875288658753320",
    "83814206171776691473035982534904287554687311595628638823537875937519577818577805",
    "3217122680661300192787661119590921642019893809525720",
);

pub(crate) const SQRT2: &str = concat!(
    "1.414213562373095048801688724209698078569671875376948073176679737990732478462107",
    "03885038753432764157273501384623091229702492483605585073721264412149709993583141",
    "32226659275055927557999505011527820605714701095599716059702745345968620147285174",
    "18640889198609552329230484308714321450839762603627995251407989687253396546331808",
    "82964062061525835239505474575028775996172983557522033753185701135437460340849884",
    "71603868999706990048150305440277903164542478230684929369186215805784631115966687",
    "13013015618568987237235288509264861249497715421833420428568606014682472077143585",
    "48741556570696776537202264854470158588016207584749226572260020855844665214583988",
    "93944370926591800311388246468157082630100594858704003186480342194897278290641045",
    "07263688131373985525611732204024509122770022694112757362728049573810896750401836",
    "98683684507257993647290607629969413804756548237289971803268024744206292691248590",
    "52181004459842150591120249441341728531478105803603371077309182869314710171111683",
    "9165817268894197587165821521282295184884720896946338",
);
