method compute5f (k:int) returns (r:int)
  requires k >= 1
  ensures r == 5*f(k)

function f(k:int):int
  requires k >= 1;
{  (exp(2,3*k) - exp(3,k)) / 5  }

function exp(x:int,e:int):int
  requires e >= 0
{ if e==0 then 1 else x * exp(x,e-1) }
