lemma expPlus3_Lemma (x:int,e:int)
  requires e >= 0;
  ensures x * x * x * exp(x,e) == exp(x,e+3);
{
assert  x * x * x * exp(x,e) == x * x * exp(x,e+1) == x * exp(x,e+2) == exp(x,e+3);
}

function exp(x:int,e:int):int
  requires e >= 0
{ if e==0 then 1 else x * exp(x,e-1) }
